"""Integral kernels k(t,s), their t-derivatives, and the kernel constants.

The built-in right-focal Green's function (k = min(s,t), the kernel of
u'' = -delta with u(0) = u'(1) = 0) gets special treatment: its kink lies
on a node whenever t does, its derivative row integrals reduce to tail
integrals, and its constants are known in closed form (K = 1/2, K* = 1).
Generic kernels go through node-aligned trapezoid quadrature.
"""

from __future__ import annotations

import numpy as np

from .errors import CheckResult, EvaluationError, ShapeError
from .expr import eval_dominator, eval_kernel_expr, parse
from .grid import Grid, integrate


class Kernel:
    """A kernel k(t,s) >= 0 with non-negative t-derivative dk(t,s).

    ``k`` and ``dk`` must accept numpy arrays (broadcasting).  ``phi`` and
    ``psi`` are the optional L1 dominators used only by hypothesis checks.
    Instances are immutable in spirit; the only mutation is a per-grid
    cache of quadrature weight matrices.
    """

    def __init__(self, k, dk, phi=None, psi=None, name: str = "custom"):
        self.k = k
        self.dk = dk
        self.phi = phi
        self.psi = psi
        self.name = name
        self._cache: dict[int, dict] = {}

    def __repr__(self) -> str:
        return f"Kernel({self.name!r})"

    def _grid_data(self, grid: Grid, key: str):
        data = self._cache.setdefault(grid.n, {})
        if key not in data:
            data[key] = getattr(self, "_make_" + key)(grid)
        return data[key]

    @staticmethod
    def _trap_weights(grid: Grid) -> np.ndarray:
        w = np.full(grid.n + 1, grid.h)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def _make_value_weights(self, grid: Grid) -> np.ndarray:
        kmat = self._sample(self.k, grid.nodes[:, None], grid.nodes[None, :], "k")
        return kmat * self._trap_weights(grid)

    def _make_deriv_weights(self, grid: Grid) -> np.ndarray:
        dkmat = self._sample(self.dk, grid.nodes[:, None], grid.nodes[None, :], "dk")
        return dkmat * self._trap_weights(grid)

    def _make_K(self, grid: Grid) -> float:
        row = self._sample(self.k, np.float64(1.0), grid.nodes, "k")
        return integrate(row, grid)

    def _make_Kstar_rows(self, grid: Grid) -> np.ndarray:
        return self._grid_data(grid, "deriv_weights").sum(axis=1)

    def _sample(self, fn, t, s, label: str) -> np.ndarray:
        try:
            with np.errstate(all="ignore"):
                out = np.asarray(fn(t, s), dtype=float)
        except Exception as exc:
            raise EvaluationError(f"kernel {label}(t,s) failed to evaluate: {exc}") from exc
        out = np.broadcast_to(out, np.broadcast_shapes(np.shape(t), np.shape(s)))
        if not np.isfinite(out).all():
            raise EvaluationError(f"kernel {label}(t,s) produced non-finite values")
        return out

    def value_weight_matrix(self, grid: Grid) -> np.ndarray:
        """W with W[j] @ F = int_0^1 k(t_j, s) F(s) ds by trapezoid."""
        return self._grid_data(grid, "value_weights")

    def deriv_weight_matrix(self, grid: Grid) -> np.ndarray:
        """Same for the derivative rows int_0^1 dk(t_j, s) F(s) ds."""
        return self._grid_data(grid, "deriv_weights")


def _tail_weight_matrix(grid: Grid) -> np.ndarray:
    # Row j holds the trapezoid weights of the integral over [t_j, 1]:
    # the focal kernel's derivative row with the jump split at node j.
    n, h = grid.n, grid.h
    w = np.triu(np.full((n + 1, n + 1), h))
    idx = np.arange(n + 1)
    w[idx, idx] *= 0.5
    w[:, n] *= 0.5
    w[n, :] = 0.0
    return w


class FocalKernel(Kernel):
    """Green's function for the right focal conditions u(0) = u'(1) = 0.

    k(t,s) = s for s <= t and t otherwise; dk(t,s) jumps from 0 to 1 at
    s = t.  Dominators Phi(s) = s and Psi(s) = 1.  K and K* are exact:
    the trapezoid rule on node-aligned pieces reproduces 1/2 and 1 - t_j
    in exact arithmetic, so the closed forms are used directly.
    """

    def __init__(self):
        super().__init__(
            k=lambda t, s: np.minimum(s, t),
            dk=lambda t, s: np.where(s <= t, 0.0, 1.0),
            phi=lambda s: s,
            psi=lambda s: np.ones_like(np.asarray(s, dtype=float)),
            name="focal",
        )

    def _make_deriv_weights(self, grid: Grid) -> np.ndarray:
        return _tail_weight_matrix(grid)

    def _make_K(self, grid: Grid) -> float:
        return 0.5

    def _make_Kstar_rows(self, grid: Grid) -> np.ndarray:
        return 1.0 - grid.nodes


def kernel_from_exprs(k_src: str, dk_src: str, phi_src: str | None = None,
                      psi_src: str | None = None, name: str = "custom") -> Kernel:
    """Build a Kernel from expression strings in t and s (dominators in s)."""
    k_ast = parse(k_src, "kernel")
    dk_ast = parse(dk_src, "kernel")
    phi = psi = None
    if phi_src is not None:
        phi_ast = parse(phi_src, "dominator")
        phi = lambda s: eval_dominator(phi_ast, s)
    if psi_src is not None:
        psi_ast = parse(psi_src, "dominator")
        psi = lambda s: eval_dominator(psi_ast, s)
    return Kernel(
        k=lambda t, s: eval_kernel_expr(k_ast, t, s),
        dk=lambda t, s: eval_kernel_expr(dk_ast, t, s),
        phi=phi,
        psi=psi,
        name=name,
    )


def constant_K(kernel: Kernel, grid: Grid) -> float:
    """K = int_0^1 k(1,s) ds."""
    return kernel._grid_data(grid, "K")


def constant_Kstar(kernel: Kernel, grid: Grid) -> float:
    """K* = sup over t of int_0^1 dk(t,s) ds, taken over grid nodes."""
    return float(np.max(kernel._grid_data(grid, "Kstar_rows")))


def _check_row(kernel: Kernel, grid: Grid, F, j: int, key: str) -> float:
    F = np.asarray(F, dtype=float)
    if F.shape != (grid.n + 1,):
        raise ShapeError(f"expected {grid.n + 1} samples, got {F.shape}")
    if not 0 <= j <= grid.n:
        raise ShapeError(f"node index {j} out of range for {grid!r}")
    return float(kernel._grid_data(grid, key)[j] @ F)


def apply_kernel_row(kernel: Kernel, grid: Grid, F, j: int) -> float:
    """int_0^1 k(t_j, s) F(s) ds for node samples F."""
    return _check_row(kernel, grid, F, j, "value_weights")


def apply_dkernel_row(kernel: Kernel, grid: Grid, F, j: int) -> float:
    """int_0^1 dk(t_j, s) F(s) ds for node samples F."""
    return _check_row(kernel, grid, F, j, "deriv_weights")


def check_kernel_hypotheses(kernel: Kernel, m: int = 64, tol: float = 1e-9) -> list[CheckResult]:
    """Sampled falsification of positivity and domination on an m x m lattice.

    These are warnings, not proofs: the lattice can refute the standing
    hypotheses but cannot establish measurability or a.e. statements.
    """
    pts = np.linspace(0.0, 1.0, m)
    t = pts[:, None]
    s = pts[None, :]
    results = []
    kvals = kernel._sample(kernel.k, t, s, "k")
    dkvals = kernel._sample(kernel.dk, t, s, "dk")
    for label, vals in (("kernel k >= 0", kvals), ("kernel dk >= 0", dkvals)):
        worst = float(vals.min())
        if worst < -tol:
            i, j = np.unravel_index(int(vals.argmin()), vals.shape)
            results.append(CheckResult(label, "warn",
                                       f"min {worst:.3g} at t={pts[i]:.4g}, s={pts[j]:.4g}"))
        else:
            results.append(CheckResult(label, "pass", f"min {worst:.3g} on {m}x{m} lattice"))
    if kernel.phi is not None:
        gap = float((np.broadcast_to(kernel.phi(s), kvals.shape) - kvals).min())
        status = "pass" if gap >= -tol else "warn"
        results.append(CheckResult("kernel k <= Phi", status, f"min slack {gap:.3g}"))
    if kernel.psi is not None:
        gap = float((np.broadcast_to(kernel.psi(s), dkvals.shape) - dkvals).min())
        status = "pass" if gap >= -tol else "warn"
        results.append(CheckResult("kernel dk <= Psi", status, f"min slack {gap:.3g}"))
    return results
