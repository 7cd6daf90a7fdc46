"""Classify a box of (lambda, eta1, eta2) parameter points by certificate.

Each lattice point gets the existence check at fixed (r, R) and, when a
growth witness is supplied, the non-existence check.  Cells are points,
not boxes: nothing is claimed between lattice points.  Both certificates
passing at once ('conflict') is impossible when the declared inputs are
sound, so that class exists purely as a consistency alarm.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .bounds import BoundSet, LinearGrowthWitness
from .certificate import check_existence, check_nonexistence
from .errors import ParameterError
from .problem import ProblemSpec


@dataclass(frozen=True)
class SweepCell:
    lam: float
    eta1: float
    eta2: float
    classification: str  # 'existence' | 'nonexistence' | 'both-fail' | 'conflict'
    value_branch: float
    deriv_branch: float
    idx0_value: float
    upper_margin: float
    lower_margin: float
    nonexistence_lhs: float | None
    rigor: str


def axis_values(start: float, stop: float, steps: int) -> np.ndarray:
    """Inclusive lattice along one axis; steps is the number of points."""
    if steps < 1:
        raise ParameterError(f"need at least one step per axis, got {steps}")
    if start < 0 or stop < 0:
        raise ParameterError("parameter box must be non-negative")
    if steps == 1:
        return np.array([float(start)])
    return np.linspace(float(start), float(stop), steps)


def _classify(exists: bool, nonexists: bool | None) -> str:
    if exists and nonexists:
        return "conflict"
    if exists:
        return "existence"
    if nonexists:
        return "nonexistence"
    return "both-fail"


def run_sweep(spec: ProblemSpec, lam_values, eta1_values, eta2_values,
              bounds: BoundSet, r: float, R: float,
              witness: LinearGrowthWitness | None = None,
              workers: int = 1) -> list[SweepCell]:
    """Evaluate the certificates at every lattice point, in lexicographic order.

    Output is identical for any worker count: cells are pure functions of
    their parameters and are gathered in input order.
    """
    # Warm the per-rho bound entries once so parallel cells share them.
    bounds.f_upper(R)
    bounds.f_lower(r)
    bounds.h_upper(1, R)
    bounds.h_upper(2, R)

    points = [(float(a), float(b), float(c))
              for a, b, c in product(lam_values, eta1_values, eta2_values)]

    def cell(point: tuple[float, float, float]) -> SweepCell:
        lam, eta1, eta2 = point
        local = spec.with_params(lam, eta1, eta2)
        ec = check_existence(local, bounds, r, R)
        nc = check_nonexistence(local, witness) if witness is not None else None
        return SweepCell(
            lam=lam,
            eta1=eta1,
            eta2=eta2,
            classification=_classify(ec.passed, None if nc is None else nc.passed),
            value_branch=ec.lhs_value_branch,
            deriv_branch=ec.lhs_deriv_branch,
            idx0_value=ec.lhs_idx0,
            upper_margin=ec.upper_margin,
            lower_margin=ec.lower_margin,
            nonexistence_lhs=None if nc is None else nc.lhs,
            rigor=ec.rigor,
        )

    if workers <= 1:
        return [cell(p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(cell, points, chunksize=max(1, len(points) // (4 * workers))))


def conflict_cells(cells: list[SweepCell]) -> list[SweepCell]:
    return [c for c in cells if c.classification == "conflict"]
