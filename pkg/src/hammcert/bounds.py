"""Certificate inputs: extrema of the nonlinearity and functional suprema.

The existence certificate needs an upper bound on the max of f over
[0,1] x [0,rho]^2, a lower bound on its min, and upper bounds on the
functional suprema H_i over the sphere of cone functions with C1 norm rho.
Lattice and sphere sampling bound these extrema from the *wrong* side, so
sampled values are always labelled heuristic (and nudged by a safety
factor before use); the certified label is reserved for closed-form bounds
declared in the problem file, which is how the worked examples supply them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IncompleteBoundsError, ParameterError
from .expr import Expr, eval_bound, eval_functional, eval_nonlinearity
from .grid import GridFunction, c1_norm, random_cone_function

DEFAULT_INFLATION = 1.05


@dataclass(frozen=True)
class BoundEntry:
    """One bound value with its raw (pre-inflation) estimate and rigor tag."""

    value: float
    raw: float
    rigor: str  # 'certified' | 'heuristic'


@dataclass(frozen=True)
class LinearGrowthWitness:
    """Constants tau, xi_1, xi_2 for the non-existence certificate:
    f(t,u,v) <= tau*u everywhere and h_i[u] <= xi_i * sup|u| on the cone."""

    tau: float
    xi1: float
    xi2: float

    def __post_init__(self):
        for name, val in (("tau", self.tau), ("xi1", self.xi1), ("xi2", self.xi2)):
            if val < 0:
                raise ParameterError(f"witness {name} must be non-negative, got {val}")


@dataclass(frozen=True)
class Counterexample:
    kind: str  # 'f-negative' | 'f-growth' | 'h1' | 'h2'
    point: tuple | None  # (t, u, v) for the f kinds
    value: float
    bound: float
    detail: str


@dataclass(frozen=True)
class FalsificationResult:
    consistent: bool
    counterexample: Counterexample | None
    points_checked: int


def estimate_f_extrema(spec, rho: float, m: int = 64) -> tuple[float, float]:
    """Sampled (max, min) of f over [0,1] x [0,rho]^2.

    An m^3 lattice scan followed by one coordinate refinement pass around
    the best cell of each extremum.  The max estimate is a *lower* bound of
    the true max and the min estimate an *upper* bound of the true min:
    heuristic direction, by construction.
    """
    if rho <= 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    if m < 2:
        raise ParameterError(f"lattice size must be at least 2, got {m}")
    axes = (np.linspace(0.0, 1.0, m), np.linspace(0.0, rho, m), np.linspace(0.0, rho, m))
    vals = eval_nonlinearity(spec.f, axes[0][:, None, None], axes[1][None, :, None],
                             axes[2][None, None, :])
    vals = np.broadcast_to(np.asarray(vals), (m, m, m))
    max_est = _refined_extremum(spec, axes, vals, rho, m, sign=+1)
    min_est = _refined_extremum(spec, axes, vals, rho, m, sign=-1)
    return max_est, min_est


def _refined_extremum(spec, axes, vals, rho, m, sign) -> float:
    flat = sign * vals
    idx = np.unravel_index(int(np.argmax(flat)), vals.shape)
    best = float(vals[idx])
    uppers = (1.0, rho, rho)
    local = []
    for axis, i, hi in zip(axes, idx, uppers):
        cell = hi / (m - 1)
        local.append(np.linspace(max(0.0, axis[i] - cell), min(hi, axis[i] + cell), m))
    fine = eval_nonlinearity(spec.f, local[0][:, None, None], local[1][None, :, None],
                             local[2][None, None, :])
    fine = np.broadcast_to(np.asarray(fine), (m, m, m))
    refined = float(np.max(sign * fine)) * sign
    return max(best, refined) if sign > 0 else min(best, refined)


def sphere_family(spec, rho: float, samples: int, rng: np.random.Generator) -> list[GridFunction]:
    """Cone functions with C1 norm exactly rho, drawn from the sphere.

    The family is the ramp rho*t, the constant rho (derivative zero, still
    attains ||u|| = rho), and rescaled random non-decreasing functions.
    """
    grid = spec.grid
    n1 = grid.n + 1
    family = [
        GridFunction.ramp(grid, rho),
        GridFunction(grid, np.full(n1, rho), np.zeros(n1)),
    ]
    family.extend(random_cone_function(grid, rng, norm=rho) for _ in range(samples))
    return family


def estimate_H(spec, i: int, rho: float, samples: int = 200, seed: int = 0) -> float:
    """Heuristic sup of h_i over the sphere of cone functions with norm rho."""
    if i not in (1, 2):
        raise ParameterError(f"functional index must be 1 or 2, got {i}")
    if rho <= 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    h = spec.h1 if i == 1 else spec.h2
    rng = np.random.default_rng([seed, i])
    return max(eval_functional(h, u) for u in sphere_family(spec, rho, samples, rng))


def falsify_linear_growth(spec, witness: LinearGrowthWitness, budget: int = 4096,
                          seed: int = 0, eps: float = 1e-9) -> FalsificationResult:
    """Try to refute 0 <= f <= tau*u and h_i[u] <= xi_i * sup|u|.

    Samples lattices plus random points over expanding boxes [0, 2^k]^2 in
    (u,v), and random cone functions on matching spheres, until the point
    budget runs out or a violation turns up.  Returns the first violating
    point found (deterministic for a fixed seed).
    """
    if budget < 1:
        raise ParameterError(f"budget must be at least 1, got {budget}")
    rng = np.random.default_rng(seed)
    m = 8
    checked = 0
    k = 0
    while checked < budget:
        rho = 2.0**k
        t_ax = np.linspace(0.0, 1.0, m)
        u_ax = np.linspace(0.0, rho, m)
        lattice = np.stack(np.meshgrid(t_ax, u_ax, u_ax, indexing="ij"), axis=-1).reshape(-1, 3)
        rand = rng.random((m**3, 3)) * np.array([1.0, rho, rho])
        for pts in (lattice, rand):
            ce = _check_growth_points(spec, witness, pts, eps)
            checked += len(pts)
            if ce is not None:
                return FalsificationResult(False, ce, checked)
        for _ in range(4):
            u_fn = random_cone_function(spec.grid, rng, norm=rho)
            sup = float(np.max(u_fn.values))
            for i, xi in ((1, witness.xi1), (2, witness.xi2)):
                h = spec.h1 if i == 1 else spec.h2
                hv = eval_functional(h, u_fn)
                if hv > xi * sup + eps:
                    ce = Counterexample(
                        kind=f"h{i}",
                        point=None,
                        value=hv,
                        bound=xi * sup,
                        detail=f"cone function with C1 norm {c1_norm(u_fn):.6g}, sup {sup:.6g}",
                    )
                    return FalsificationResult(False, ce, checked)
        k += 1
    return FalsificationResult(True, None, checked)


def _check_growth_points(spec, witness, pts, eps) -> Counterexample | None:
    t, u, v = pts[:, 0], pts[:, 1], pts[:, 2]
    fv = np.asarray(eval_nonlinearity(spec.f, t, u, v))
    bad = (fv < -eps) | (fv > witness.tau * u + eps)
    if not bad.any():
        return None
    j = int(np.argmax(bad))
    point = (float(t[j]), float(u[j]), float(v[j]))
    if fv[j] < -eps:
        return Counterexample("f-negative", point, float(fv[j]), 0.0,
                              f"f{point} = {fv[j]:.6g} < 0")
    return Counterexample("f-growth", point, float(fv[j]), float(witness.tau * u[j]),
                          f"f{point} = {fv[j]:.6g} > tau*u = {witness.tau * u[j]:.6g}")


@dataclass
class _Sampler:
    """Heuristic fallback behind a BoundSet; caches one estimate per rho."""

    spec: object
    m: int = 64
    samples: int = 200
    seed: int = 0
    inflation: float = DEFAULT_INFLATION
    _f_cache: dict = field(default_factory=dict, repr=False)
    _h_cache: dict = field(default_factory=dict, repr=False)

    def f_extrema(self, rho: float) -> tuple[float, float]:
        if rho not in self._f_cache:
            self._f_cache[rho] = estimate_f_extrema(self.spec, rho, self.m)
        return self._f_cache[rho]

    def h_value(self, i: int, rho: float) -> float:
        key = (i, rho)
        if key not in self._h_cache:
            self._h_cache[key] = estimate_H(self.spec, i, rho, self.samples, self.seed)
        return self._h_cache[key]


class BoundSet:
    """f_upper, f_lower and H_i as functions of rho, each tagged with rigor.

    Declared closed-form expressions (in the variable rho) yield certified
    entries.  Slots without a declaration fall back to the attached
    sampler and come back heuristic, with the safety factor applied to the
    raw estimate; without a sampler a missing slot raises
    IncompleteBoundsError.  The heuristic sampler draws from the sphere
    ||u|| = rho, which is what the definition of H_i prescribes.
    """

    sampled_set = "sphere"

    def __init__(self, f_upper: Expr | None = None, f_lower: Expr | None = None,
                 h1: Expr | None = None, h2: Expr | None = None, sampler: _Sampler | None = None):
        self._f_upper = f_upper
        self._f_lower = f_lower
        self._h = {1: h1, 2: h2}
        self._sampler = sampler

    def with_sampler(self, spec, m: int = 64, samples: int = 200, seed: int = 0,
                     inflation: float = DEFAULT_INFLATION) -> "BoundSet":
        sampler = _Sampler(spec, m=m, samples=samples, seed=seed, inflation=inflation)
        return BoundSet(self._f_upper, self._f_lower, self._h[1], self._h[2], sampler)

    @property
    def declared_complete(self) -> bool:
        return all(e is not None for e in (self._f_upper, self._f_lower, self._h[1], self._h[2]))

    @property
    def seed(self) -> int | None:
        return self._sampler.seed if self._sampler is not None else None

    def _declared(self, expr: Expr, rho: float, label: str) -> BoundEntry:
        val = eval_bound(expr, rho)
        if val < 0:
            raise ParameterError(f"declared bound {label}({rho}) = {val} is negative")
        return BoundEntry(val, val, "certified")

    def f_upper(self, rho: float) -> BoundEntry:
        if self._f_upper is not None:
            return self._declared(self._f_upper, rho, "f_upper")
        if self._sampler is None:
            raise IncompleteBoundsError("no declared f_upper bound and no sampler attached")
        raw = self._sampler.f_extrema(rho)[0]
        return BoundEntry(raw * self._sampler.inflation, raw, "heuristic")

    def f_lower(self, rho: float) -> BoundEntry:
        if self._f_lower is not None:
            return self._declared(self._f_lower, rho, "f_lower")
        if self._sampler is None:
            raise IncompleteBoundsError("no declared f_lower bound and no sampler attached")
        raw = self._sampler.f_extrema(rho)[1]
        return BoundEntry(raw * (2.0 - self._sampler.inflation), raw, "heuristic")

    def h_upper(self, i: int, rho: float) -> BoundEntry:
        if i not in (1, 2):
            raise ParameterError(f"functional index must be 1 or 2, got {i}")
        if self._h[i] is not None:
            return self._declared(self._h[i], rho, f"h{i}")
        if self._sampler is None:
            raise IncompleteBoundsError(f"no declared h{i} bound and no sampler attached")
        raw = self._sampler.h_value(i, rho)
        return BoundEntry(raw * self._sampler.inflation, raw, "heuristic")
