"""Fixed points of T by Picard iteration, with cone and annulus checks.

Successive substitution is the only solve primitive: the operator is
positive on the cone and, at the feasible parameters the certificates
accept, the iteration contracts in practice.  The existence theorem is
index-theoretic and promises nothing about Picard, so failure to converge
is reported explicitly (diverged / max-iterations) rather than treated as
evidence against a certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, ParameterError
from .grid import (CONE_TOL, Grid, GridFunction, c1_distance, c1_norm,
                   cone_defect, consistency_defect, in_cone,
                   random_cone_function)
from .problem import ProblemSpec, apply_T

TOL_FIXPOINT = 1e-10
MAX_ITERATIONS = 10_000
DIVERGENCE_CAP = 1e8


@dataclass(frozen=True)
class SolveResult:
    status: str  # 'converged' | 'max-iterations' | 'diverged'
    u: GridFunction
    iterations: int
    residual: float  # c1_norm(u - Tu) for the returned u (stale if diverged)
    norm: float
    cone_ok: bool
    in_annulus: bool | None  # set when (r, R) were supplied

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def _annulus(norm: float, r: float | None, R: float | None) -> bool | None:
    if r is None or R is None:
        return None
    return r <= norm <= R


def picard_solve(spec: ProblemSpec, u0: GridFunction, tol: float = TOL_FIXPOINT,
                 max_iter: int = MAX_ITERATIONS, r: float | None = None,
                 R: float | None = None) -> SolveResult:
    """Iterate u <- Tu from a cone start until the residual drops below tol.

    The reported residual is c1_norm(u - Tu) for the exact iterate
    returned, so an independent re-check reproduces it.  An evaluation
    overflow on a later iterate (e.g. an exponential nonlinearity fed a
    runaway iterate) counts as divergence; an error on the very first
    application is a problem with the start and propagates.
    """
    if tol <= 0:
        raise ParameterError(f"tolerance must be positive, got {tol}")
    if not in_cone(u0):
        raise ParameterError(
            f"start function leaves the cone by {cone_defect(u0):.3g}"
        )
    u = u0
    residual = np.inf
    for it in range(max_iter):
        try:
            w = apply_T(spec, u)
        except EvaluationError:
            if it == 0:
                raise
            norm = c1_norm(u)
            return SolveResult("diverged", u, it, residual, norm,
                               in_cone(u), _annulus(norm, r, R))
        residual = c1_distance(u, w)
        if residual <= tol:
            norm = c1_norm(u)
            return SolveResult("converged", u, it + 1, residual, norm,
                               in_cone(u), _annulus(norm, r, R))
        if c1_norm(w) > DIVERGENCE_CAP:
            norm = c1_norm(w)
            return SolveResult("diverged", w, it + 1, residual, norm,
                               in_cone(w), _annulus(norm, r, R))
        u = w
    residual = c1_distance(u, apply_T(spec, u))
    norm = c1_norm(u)
    return SolveResult("max-iterations", u, max_iter, residual, norm,
                       in_cone(u), _annulus(norm, r, R))


def _start_functions(spec: ProblemSpec, grid: Grid, starts: int,
                     rng: np.random.Generator) -> list[GridFunction]:
    out = [GridFunction.zero(grid)]
    if starts <= 1:
        return out
    n_ramps = max(1, (starts - 1) // 2)
    for rho in np.logspace(-2, 1, n_ramps):
        out.append(GridFunction.ramp(grid, rho))
    while len(out) < starts:
        rho = 10.0 ** rng.uniform(-2, 1)
        out.append(random_cone_function(grid, rng, norm=rho))
    return out


def multistart_solve(spec: ProblemSpec, starts: int = 8, seed: int = 0,
                     n: int | None = None, tol: float = TOL_FIXPOINT,
                     max_iter: int = MAX_ITERATIONS, r: float | None = None,
                     R: float | None = None) -> list[SolveResult]:
    """Picard from the zero start, log-spaced ramps, and random cone starts.

    Converged results within c1 distance 10*tol of an already kept one are
    dropped as numerical twins.  Output is sorted by norm, so the
    aggregation order does not depend on scheduling.
    """
    if starts < 1:
        raise ParameterError(f"need at least one start, got {starts}")
    grid = Grid(n) if n is not None else spec.grid
    rng = np.random.default_rng(seed)
    results = [picard_solve(spec, u0, tol=tol, max_iter=max_iter, r=r, R=R)
               for u0 in _start_functions(spec, grid, starts, rng)]
    results.sort(key=lambda res: (res.norm, res.status, res.residual))
    kept: list[SolveResult] = []
    for res in results:
        if res.converged and any(
            k.converged and c1_distance(res.u, k.u) < 10 * tol for k in kept
        ):
            continue
        kept.append(res)
    return kept


@dataclass(frozen=True)
class VerificationReport:
    residual: float
    norm: float
    cone_ok: bool
    cone_defect: float
    consistency_defect: float
    in_annulus: bool | None

    @property
    def is_fixed_point(self) -> bool:
        return self.residual <= TOL_FIXPOINT


def verify_solution(spec: ProblemSpec, u: GridFunction, r: float | None = None,
                    R: float | None = None) -> VerificationReport:
    """Independent re-check of a candidate: residual, cone, consistency, annulus."""
    residual = c1_distance(u, apply_T(spec, u))
    norm = c1_norm(u)
    return VerificationReport(
        residual=residual,
        norm=norm,
        cone_ok=in_cone(u),
        cone_defect=cone_defect(u),
        consistency_defect=consistency_defect(u),
        in_annulus=_annulus(norm, r, R),
    )
