"""Exception types shared across the library."""


class DomainError(ValueError):
    """An argument is outside an operation's documented domain."""


class GscConditionError(RuntimeError):
    """A kernel pair failed the generalized Sonine check gating a solver."""


class IllConditionedSystemError(RuntimeError):
    """A forward-substitution step hit a near-vanishing diagonal."""
