"""Weakly singular kernels and Sonine pairs.

A kernel k(t) = t^(-sigma) * (smooth part) on (0, b] is described by a
:class:`KernelSpec`. A :class:`SoninePair` couples a kernel k with an
associate K so that the convolution K*k can be checked against 1 (the
classical Sonine condition) or against a function g with g(0) = 1 and
integrable derivative (the generalized condition).

All objects are immutable after construction; operations are pure
functions, so everything here is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .mesh import SampledFunction

__all__ = [
    "gamma",
    "kappa",
    "ExponentFunction",
    "affine_exponent",
    "KernelSpec",
    "power_kernel",
    "classical_abel_kernel",
    "variable_exponent_kernel",
    "SoninePair",
    "make_classical_abel_pair",
    "make_variable_exponent_pair",
]

#: number of points used to spot-verify declared bounds of an exponent function
VALIDATION_GRID = 1024

GAMMA_MAX_ARG = 50.0


def gamma(x: float) -> float:
    """Gamma function on (0, 50].

    Thin validating wrapper over the platform Gamma, which is accurate to
    a few ulp, far inside the 1e-12 relative tolerance we promise.
    """
    if not isinstance(x, (int, float, np.floating, np.integer)) or isinstance(x, bool):
        raise DomainError(f"gamma expects a real argument, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma argument must be finite, got {x!r}")
    if x <= 0.0 or x > GAMMA_MAX_ARG:
        raise DomainError(f"gamma argument must lie in (0, {GAMMA_MAX_ARG:g}], got {x!r}")
    return math.gamma(x)


def kappa(alpha0: float) -> float:
    """Normalization Gamma(alpha0) * Gamma(1 - alpha0) for alpha0 in (0, 1).

    Agrees with the reflection form pi / sin(pi * alpha0) to full precision;
    the test suite pins that equivalence.
    """
    alpha0 = float(alpha0)
    if not math.isfinite(alpha0) or not 0.0 < alpha0 < 1.0:
        raise DomainError(f"kappa is defined for alpha0 in (0, 1), got {alpha0!r}")
    return gamma(alpha0) * gamma(1.0 - alpha0)


def _call_elementwise(fn: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate a scalar-or-vector callable on an array."""
    try:
        out = np.asarray(fn(x), dtype=float)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(float(v))) for v in x.ravel()]).reshape(x.shape)


@dataclass(frozen=True, slots=True)
class ExponentFunction:
    """A differentiable exponent profile alpha(t) with declared bounds.

    ``fn`` and ``dfn`` evaluate alpha and alpha'; ``L`` bounds |alpha'|,
    and ``alpha_lo``/``alpha_hi`` bound alpha itself. Declared bounds are
    spot-verified on a grid when the profile is attached to a pair;
    profiles that violate them are rejected.
    """

    fn: Callable
    dfn: Callable
    L: float
    alpha_lo: float
    alpha_hi: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha_lo <= self.alpha_hi < 1.0:
            raise DomainError(
                "exponent bounds must satisfy 0 < alpha_lo <= alpha_hi < 1, "
                f"got [{self.alpha_lo!r}, {self.alpha_hi!r}]"
            )
        if not math.isfinite(self.L) or self.L < 0.0:
            raise DomainError(f"Lipschitz bound L must be finite and >= 0, got {self.L!r}")

    def eval(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = _call_elementwise(self.fn, np.atleast_1d(t_arr))
        return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)

    def deriv(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = _call_elementwise(self.dfn, np.atleast_1d(t_arr))
        return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)

    def validate(self, b: float) -> None:
        """Spot-verify the declared bounds on a grid over [0, b]."""
        grid = np.linspace(0.0, b, VALIDATION_GRID)
        vals = self.eval(grid)
        if not np.all(np.isfinite(vals)):
            raise DomainError("exponent function produced non-finite values on [0, b]")
        tol = 1e-12
        if vals.min() < self.alpha_lo - tol or vals.max() > self.alpha_hi + tol:
            raise DomainError(
                f"exponent range [{vals.min()!r}, {vals.max()!r}] exits the declared "
                f"bounds [{self.alpha_lo!r}, {self.alpha_hi!r}] on [0, {b!r}]"
            )
        dvals = self.deriv(grid)
        if not np.all(np.isfinite(dvals)):
            raise DomainError("exponent derivative produced non-finite values on [0, b]")
        if np.abs(dvals).max() > self.L + tol:
            raise DomainError(
                f"|alpha'| reaches {np.abs(dvals).max()!r}, above the declared "
                f"Lipschitz bound {self.L!r}"
            )

    def is_constant(self, b: float) -> bool:
        grid = np.linspace(0.0, b, VALIDATION_GRID)
        vals = self.eval(grid)
        return bool(vals.max() == vals.min()) and bool(np.all(self.deriv(grid) == 0.0))


def affine_exponent(a0: float, a1: float, b: float) -> ExponentFunction:
    """Profile alpha(t) = a0 + a1 t with exact bounds over [0, b]."""
    a0, a1, b = float(a0), float(a1), float(b)
    if not (math.isfinite(a0) and math.isfinite(a1) and math.isfinite(b) and b > 0):
        raise DomainError("affine profile needs finite a0, a1 and positive b")
    end = a0 + a1 * b
    lo, hi = min(a0, end), max(a0, end)
    if not 0.0 < lo <= hi < 1.0:
        raise DomainError(
            f"affine profile leaves (0, 1) on [0, {b!r}]: range [{lo!r}, {hi!r}]"
        )
    return ExponentFunction(
        fn=lambda t: a0 + a1 * np.asarray(t, dtype=float),
        dfn=lambda t: np.full_like(np.asarray(t, dtype=float), a1),
        L=abs(a1),
        alpha_lo=lo,
        alpha_hi=hi,
    )


@dataclass(frozen=True, slots=True)
class KernelSpec:
    """A weakly singular kernel on (0, b] in factored form.

    ``fn`` evaluates the kernel for t > 0. ``sing_exponent`` is the
    declared worst-case singularity order used for mesh grading;
    ``local_exponent`` is the true order of the t -> 0 blow-up, which the
    product quadrature factors out: kernel(t) = t^(-local_exponent) *
    smooth(t) with smooth continuous on [0, b] and smooth(0) = smooth0.
    For constant-exponent kernels the two coincide.
    """

    fn: Callable
    smooth_fn: Callable
    smooth0: float
    sing_exponent: float
    local_exponent: float
    b: float
    kind: str
    exponent: ExponentFunction | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("classical_abel", "variable_exponent_abel", "power", "tabulated"):
            raise DomainError(f"unknown kernel kind {self.kind!r}")
        if not 0.0 < self.sing_exponent < 1.0:
            raise DomainError(
                f"sing_exponent must lie in (0, 1), got {self.sing_exponent!r}"
            )
        if not 0.0 < self.local_exponent < 1.0:
            raise DomainError(
                f"local_exponent must lie in (0, 1), got {self.local_exponent!r}"
            )
        if not math.isfinite(self.b) or self.b <= 0.0:
            raise DomainError(f"kernel endpoint b must be positive, got {self.b!r}")

    def _check_domain(self, t: np.ndarray, allow_zero: bool) -> None:
        lo_bad = (t < 0.0) if allow_zero else (t <= 0.0)
        if np.any(lo_bad) or np.any(t > self.b * (1.0 + 1e-12)):
            where = "[0, b]" if allow_zero else "(0, b]"
            raise DomainError(
                f"kernel evaluation outside {where} with b={self.b!r}; "
                "evaluation at t = 0 is never defined for a singular kernel"
            )

    def eval(self, t):
        """Kernel value for t in (0, b]. t = 0 is a domain error."""
        t_arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t_arr)
        self._check_domain(flat, allow_zero=False)
        out = _call_elementwise(self.fn, flat)
        return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)

    def smooth(self, t):
        """Bounded factor t^(local_exponent) * kernel(t), continuous at 0."""
        t_arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t_arr).copy()
        self._check_domain(flat, allow_zero=True)
        out = np.empty_like(flat)
        zero = flat == 0.0
        out[zero] = self.smooth0
        if np.any(~zero):
            out[~zero] = _call_elementwise(self.smooth_fn, flat[~zero])
        return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)

    @staticmethod
    def from_samples(
        phi: SampledFunction,
        sing_exponent: float | None = None,
        smooth0: float | None = None,
    ) -> "KernelSpec":
        """Wrap node samples of a singular function as a tabulated kernel.

        The singularity order is fitted from the first two interior nodes
        unless supplied. The bounded factor is interpolated piecewise
        linearly between nodes, with its t = 0 value extrapolated.
        """
        nodes = phi.mesh.nodes
        vals = phi.values
        if len(nodes) < 3:
            raise DomainError("tabulated kernel needs at least two interior nodes")
        if sing_exponent is None:
            v1, v2 = vals[1], vals[2]
            if not (np.isfinite(v1) and np.isfinite(v2) and v1 > 0 and v2 > 0):
                raise DomainError(
                    "cannot fit a singularity order from non-positive samples; "
                    "pass sing_exponent explicitly"
                )
            fitted = math.log(v1 / v2) / math.log(nodes[2] / nodes[1])
            sing_exponent = float(np.clip(fitted, 0.01, 0.99))
        sig = float(sing_exponent)
        m = np.empty_like(vals)
        m[1:] = vals[1:] * nodes[1:] ** sig
        if smooth0 is not None:
            m[0] = smooth0
        elif np.isfinite(vals[0]):
            m[0] = 0.0  # t^sig * (finite value) vanishes at t = 0
        else:
            # linear extrapolation of the bounded factor to t = 0
            m[0] = m[1] - nodes[1] * (m[2] - m[1]) / (nodes[2] - nodes[1])
        m_nodes = nodes.copy()

        def smooth_fn(t, _x=m_nodes, _y=m):
            return np.interp(np.asarray(t, dtype=float), _x, _y)

        def fn(t, _x=m_nodes, _y=m, _s=sig):
            t = np.asarray(t, dtype=float)
            return np.interp(t, _x, _y) * t ** (-_s)

        return KernelSpec(
            fn=fn,
            smooth_fn=smooth_fn,
            smooth0=float(m[0]),
            sing_exponent=sig,
            local_exponent=sig,
            b=phi.mesh.b,
            kind="tabulated",
        )


def power_kernel(coef: float, exponent: float, b: float, kind: str = "power") -> KernelSpec:
    """Kernel coef * t^(-exponent) with exponent in (0, 1)."""
    coef, exponent = float(coef), float(exponent)
    if not math.isfinite(coef) or coef == 0.0:
        raise DomainError(f"power kernel coefficient must be finite and nonzero, got {coef!r}")
    return KernelSpec(
        fn=lambda t: coef * np.asarray(t, dtype=float) ** (-exponent),
        smooth_fn=lambda t: np.full_like(np.asarray(t, dtype=float), coef),
        smooth0=coef,
        sing_exponent=exponent,
        local_exponent=exponent,
        b=float(b),
        kind=kind,
    )


def classical_abel_kernel(alpha: float, b: float) -> KernelSpec:
    """Abel kernel t^(-alpha)."""
    alpha = float(alpha)
    if not math.isfinite(alpha) or not 0.0 < alpha < 1.0:
        raise DomainError(f"Abel exponent must lie in (0, 1), got {alpha!r}")
    return power_kernel(1.0, alpha, b, kind="classical_abel")


def variable_exponent_kernel(af: ExponentFunction, b: float) -> KernelSpec:
    """Kernel t^(-alpha(t)) for a validated exponent profile.

    The declared singularity order is the supremum of alpha (conservative,
    drives mesh grading); the factored-out local order is alpha(0), the
    true strength of the blow-up, so the bounded factor t^(alpha(0) -
    alpha(t)) tends to 1 at the origin.
    """
    af.validate(b)
    alpha0 = float(af.eval(0.0))

    def fn(t, _af=af):
        t = np.asarray(t, dtype=float)
        return np.exp(-_af.eval(t) * np.log(t))

    def smooth_fn(t, _af=af, _a0=alpha0):
        t = np.asarray(t, dtype=float)
        return np.exp((_a0 - _af.eval(t)) * np.log(t))

    return KernelSpec(
        fn=fn,
        smooth_fn=smooth_fn,
        smooth0=1.0,
        sing_exponent=af.alpha_hi,
        local_exponent=alpha0,
        b=float(b),
        kind="variable_exponent_abel",
        exponent=af,
    )


@dataclass(frozen=True, slots=True)
class SoninePair:
    """A kernel k and its associate K sharing the interval (0, b].

    ``kappa`` is the normalization entering K when it is known (NaN for
    hand-built pairs). ``is_classical`` asserts K*k == 1 identically;
    constructors only set it when that holds analytically.
    """

    k: KernelSpec
    K: KernelSpec
    kappa: float
    is_classical: bool
    exponent: ExponentFunction | None = None

    def __post_init__(self) -> None:
        if self.k.b != self.K.b:
            raise DomainError(
                f"pair members live on different intervals: {self.k.b!r} vs {self.K.b!r}"
            )
        if self.is_classical:
            s = self.k.local_exponent + self.K.local_exponent
            if abs(s - 1.0) > 1e-12:
                raise DomainError(
                    "a classical pair needs singularity orders summing to 1, "
                    f"got {self.k.local_exponent!r} + {self.K.local_exponent!r}"
                )

    @property
    def b(self) -> float:
        return self.k.b


def make_classical_abel_pair(alpha: float, b: float) -> SoninePair:
    """Pair k = t^(-alpha), K = t^(alpha-1) / kappa(alpha)."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    kap = kappa(alpha)
    return SoninePair(
        k=classical_abel_kernel(alpha, b),
        K=power_kernel(1.0 / kap, 1.0 - alpha, b),
        kappa=kap,
        is_classical=True,
    )


def make_variable_exponent_pair(af: ExponentFunction, b: float) -> SoninePair:
    """Pair k = t^(-alpha(t)) with the constant-order associate
    K = t^(alpha(0)-1) / kappa(alpha(0)).

    The pair is classical exactly when the profile is constant on [0, b].
    """
    k = variable_exponent_kernel(af, b)  # validates af on [0, b]
    alpha0 = float(af.eval(0.0))
    kap = kappa(alpha0)
    K = power_kernel(1.0 / kap, 1.0 - alpha0, b)
    return SoninePair(
        k=k,
        K=K,
        kappa=kap,
        is_classical=af.is_constant(b),
        exponent=af,
    )
