"""Graded meshes on [0, b] and functions sampled on them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["Mesh", "SampledFunction", "graded_mesh", "default_grading"]

#: hardest grading we ever apply; steeper meshes trade accuracy for roundoff
MAX_GRADING = 4.0


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, slots=True)
class Mesh:
    """Nodes 0 = t_0 < t_1 < ... < t_N = b with t_j = b (j/N)^r.

    Instances are immutable; ``nodes`` is a read-only array.
    """

    nodes: np.ndarray
    r: float
    b: float

    @property
    def N(self) -> int:
        return len(self.nodes) - 1

    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    def same_nodes(self, other: "Mesh") -> bool:
        return self.nodes.shape == other.nodes.shape and bool(
            np.array_equal(self.nodes, other.nodes)
        )


def graded_mesh(N: int, r: float, b: float) -> Mesh:
    """Build the graded mesh t_j = b (j/N)^r.

    Parameters
    ----------
    N : int
        Number of panels, at least 2.
    r : float
        Grading exponent, at least 1. r = 1 gives a uniform mesh; larger
        values cluster nodes at t = 0 where kernels are singular.
    b : float
        Right endpoint of the interval, positive.
    """
    if not isinstance(N, (int, np.integer)) or isinstance(N, bool):
        raise DomainError(f"N must be an integer, got {N!r}")
    if N < 2:
        raise DomainError(f"N must be at least 2, got {N}")
    if not np.isfinite(r) or r < 1.0:
        raise DomainError(f"grading exponent r must satisfy r >= 1, got {r!r}")
    if not np.isfinite(b) or b <= 0.0:
        raise DomainError(f"endpoint b must be positive and finite, got {b!r}")
    j = np.arange(N + 1, dtype=float)
    nodes = b * (j / N) ** float(r)
    nodes[0] = 0.0
    nodes[-1] = b
    return Mesh(nodes=_readonly(nodes), r=float(r), b=float(b))


def default_grading(*sing_exponents: float) -> float:
    """Grading exponent 2 / (1 - max singularity exponent), capped at 4."""
    if not sing_exponents:
        raise DomainError("need at least one singularity exponent")
    worst = max(sing_exponents)
    if not 0.0 < worst < 1.0:
        raise DomainError(f"singularity exponents must lie in (0,1), got {worst!r}")
    return float(min(MAX_GRADING, 2.0 / (1.0 - worst)))


@dataclass(frozen=True, slots=True)
class SampledFunction:
    """Node values of a function on a mesh, with an interpolation tag.

    ``values[0]`` may be NaN when the function is singular at t = 0;
    every other entry must be finite. ``interp`` is either
    ``"piecewise_linear"`` or ``"piecewise_constant_left"``.
    """

    mesh: Mesh
    values: np.ndarray = field(repr=False)
    interp: str = "piecewise_linear"

    def __post_init__(self) -> None:
        vals = _readonly(self.values)
        if vals.shape != self.mesh.nodes.shape:
            raise DomainError(
                f"values length {vals.shape} does not match mesh with N={self.mesh.N}"
            )
        if self.interp not in ("piecewise_linear", "piecewise_constant_left"):
            raise DomainError(f"unknown interpolation tag {self.interp!r}")
        if not np.all(np.isfinite(vals[1:])):
            raise DomainError("sampled values must be finite away from t_0")
        object.__setattr__(self, "values", vals)

    @property
    def defined_at_zero(self) -> bool:
        return bool(np.isfinite(self.values[0]))

    def __call__(self, t):
        """Interpolate at ``t`` following the interpolation tag."""
        tq = np.asarray(t, dtype=float)
        nodes = self.mesh.nodes
        if self.interp == "piecewise_linear":
            out = np.interp(tq, nodes, self.values)
        else:
            idx = np.clip(np.searchsorted(nodes, tq, side="right") - 1, 0, self.mesh.N)
            out = self.values[idx]
        return float(out) if np.isscalar(t) else out
