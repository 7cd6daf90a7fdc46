"""Uniform grids on [0,1], sampled C1 candidates, norms and quadrature.

A candidate solution is stored as node samples of u and u' on a uniform
grid.  All integrals in the package reduce to composite trapezoid sums on
these nodes; kernel kinks are handled upstream by splitting at nodes, so
the rules here never need to know about them.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ParameterError, ShapeError

# Node values may dip this far below zero before we treat it as a genuine
# cone violation rather than floating-point noise.
CONE_TOL = 1e-9


def consistency_tol(n: int) -> float:
    """Tolerance for the u(t) = u(0) + int u' defect; tracks trapezoid order."""
    return 10.0 / n**2


class Grid:
    """Uniform partition of [0,1] into n subintervals, nodes t_j = j/n."""

    __slots__ = ("n", "h", "nodes")

    def __init__(self, n: int):
        if n < 2:
            raise ParameterError(f"grid needs at least 2 subintervals, got n={n}")
        self.n = int(n)
        self.h = 1.0 / self.n
        nodes = np.linspace(0.0, 1.0, self.n + 1)
        nodes.flags.writeable = False
        self.nodes = nodes

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and other.n == self.n

    def __hash__(self) -> int:
        return hash(("Grid", self.n))

    def __repr__(self) -> str:
        return f"Grid(n={self.n})"

    def index_of(self, t: float) -> int:
        """Index j of the node closest to t; t must sit on a node."""
        j = int(round(t * self.n))
        if not 0 <= j <= self.n or abs(self.nodes[j] - t) > 1e-12:
            raise DomainError(f"t={t} is not a node of {self!r}")
        return j


class GridFunction:
    """Samples of u and u' on a grid.  Immutable after construction."""

    __slots__ = ("grid", "values", "dvalues")

    def __init__(self, grid: Grid, values, dvalues):
        values = np.array(values, dtype=float)
        dvalues = np.array(dvalues, dtype=float)
        if values.shape != (grid.n + 1,) or dvalues.shape != (grid.n + 1,):
            raise ShapeError(
                f"expected {grid.n + 1} samples for {grid!r}, "
                f"got {values.shape} and {dvalues.shape}"
            )
        values.flags.writeable = False
        dvalues.flags.writeable = False
        self.grid = grid
        self.values = values
        self.dvalues = dvalues

    @classmethod
    def zero(cls, grid: Grid) -> "GridFunction":
        z = np.zeros(grid.n + 1)
        return cls(grid, z, z)

    @classmethod
    def ramp(cls, grid: Grid, slope: float) -> "GridFunction":
        """u(t) = slope * t, the canonical cone direction."""
        return cls(grid, slope * grid.nodes, np.full(grid.n + 1, slope))

    def scaled(self, alpha: float) -> "GridFunction":
        return GridFunction(self.grid, alpha * self.values, alpha * self.dvalues)

    def __repr__(self) -> str:
        return f"GridFunction(n={self.grid.n}, norm={c1_norm(self):.6g})"


def c1_norm(u: GridFunction) -> float:
    """Grid approximation of max(||u||_inf, ||u'||_inf)."""
    return float(max(np.max(np.abs(u.values)), np.max(np.abs(u.dvalues))))


def c1_distance(u: GridFunction, w: GridFunction) -> float:
    """c1_norm of u - w; both functions must live on the same grid."""
    if u.grid != w.grid:
        raise ShapeError(f"grid mismatch: {u.grid!r} vs {w.grid!r}")
    dv = np.max(np.abs(u.values - w.values))
    dd = np.max(np.abs(u.dvalues - w.dvalues))
    return float(max(dv, dd))


def _interp(samples: np.ndarray, grid: Grid, a):
    a = np.asarray(a, dtype=float)
    if np.any(a < 0.0) or np.any(a > 1.0):
        raise DomainError(f"evaluation point {a} outside [0,1]")
    out = np.interp(a, grid.nodes, samples)
    return float(out) if out.ndim == 0 else out


def eval_at(u: GridFunction, a):
    """u(a) by linear interpolation; exact at nodes.  Accepts arrays."""
    return _interp(u.values, u.grid, a)


def eval_deriv_at(u: GridFunction, a):
    """u'(a) by linear interpolation of the derivative samples."""
    return _interp(u.dvalues, u.grid, a)


def integrate_tail(samples, grid: Grid, j: int) -> float:
    """Composite trapezoid value of the integral over [t_j, 1]."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.n + 1,):
        raise ShapeError(f"expected {grid.n + 1} samples, got {samples.shape}")
    if not 0 <= j <= grid.n:
        raise ShapeError(f"node index {j} out of range for {grid!r}")
    if j == grid.n:
        return 0.0
    seg = samples[j:]
    return float(grid.h * (np.sum(seg) - 0.5 * (seg[0] + seg[-1])))


def integrate(samples, grid: Grid) -> float:
    """Composite trapezoid value of the integral over [0,1]."""
    return integrate_tail(samples, grid, 0)


def cumulative_integral(samples, grid: Grid) -> np.ndarray:
    """Trapezoid antiderivative at every node: F_j = int_0^{t_j} samples."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.n + 1,):
        raise ShapeError(f"expected {grid.n + 1} samples, got {samples.shape}")
    steps = 0.5 * grid.h * (samples[1:] + samples[:-1])
    out = np.empty(grid.n + 1)
    out[0] = 0.0
    np.cumsum(steps, out=out[1:])
    return out


def cone_defect(u: GridFunction) -> float:
    """How far u pokes below the cone: max(0, -min u, -min u')."""
    return float(max(0.0, -np.min(u.values), -np.min(u.dvalues)))


def in_cone(u: GridFunction, tol: float = CONE_TOL) -> bool:
    return cone_defect(u) <= tol


def consistency_defect(u: GridFunction) -> float:
    """Max over nodes of |u(t_j) - u(0) - int_0^{t_j} u'| (trapezoid)."""
    rebuilt = u.values[0] + cumulative_integral(u.dvalues, u.grid)
    return float(np.max(np.abs(u.values - rebuilt)))


def monotone_defect(u: GridFunction) -> float:
    """Largest decrease between consecutive node values (0 if non-decreasing)."""
    return float(max(0.0, np.max(u.values[:-1] - u.values[1:])))


def random_cone_function(grid: Grid, rng: np.random.Generator, norm: float | None = None) -> GridFunction:
    """Random non-negative, non-decreasing candidate.

    Draws a piecewise-linear non-negative derivative from random knots,
    integrates it for the values, and optionally rescales so the C1 norm
    equals ``norm`` exactly up to rounding (the sphere used when sampling
    functional suprema).
    """
    k = int(rng.integers(2, 7))
    knot_t = np.concatenate(([0.0], np.sort(rng.uniform(0.0, 1.0, size=k)), [1.0]))
    knot_d = rng.gamma(1.5, 1.0, size=k + 2)
    dvalues = np.interp(grid.nodes, knot_t, knot_d)
    u0 = rng.gamma(1.0, 0.5)
    values = u0 + cumulative_integral(dvalues, grid)
    u = GridFunction(grid, values, dvalues)
    if norm is not None:
        if norm <= 0:
            raise ParameterError(f"target norm must be positive, got {norm}")
        current = c1_norm(u)
        if current == 0.0:  # gamma draws make this practically impossible
            return GridFunction.ramp(grid, norm)
        u = u.scaled(norm / current)
    return u
