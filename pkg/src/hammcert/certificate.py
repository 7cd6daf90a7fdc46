"""Existence and non-existence certificates with per-inequality margins.

Existence (annulus localisation): solutions exist with r <= ||u|| <= R when

    max( lam*f_up(R)*K  + sum_i eta_i * gamma_i(1)   * H_i(R),
         lam*f_up(R)*K* + sum_i eta_i * ||gamma_i'|| * H_i(R) ) <= R
    and   lam * f_low(r) * min(K, K*) >= r.

Non-existence (only the zero solution): with growth witness (tau, xi_i),

    lam*tau*K + sum_i eta_i * xi_i * gamma_i(1) < 1.

Comparisons are exact floating comparisons and strictness matters: the
annulus inequalities are non-strict (the worked feasible point sits
exactly on the lower equality and must pass), the non-existence one is
strict (equality fails).  Margins are reported so near-boundary verdicts
are visible.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bounds import BoundEntry, BoundSet, LinearGrowthWitness
from .errors import ParameterError
from .kernel import constant_K, constant_Kstar
from .problem import ProblemSpec


@dataclass(frozen=True)
class ExistenceCertificate:
    r: float
    R: float
    lhs_value_branch: float
    lhs_deriv_branch: float
    lhs_idx0: float
    upper_margin: float  # R - max(branches)
    lower_margin: float  # lhs_idx0 - r
    verdict: str  # 'certified' | 'heuristic-pass' | 'fail'
    f_upper_R: BoundEntry
    f_lower_r: BoundEntry
    h1_R: BoundEntry
    h2_R: BoundEntry

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    @property
    def rigor(self) -> str:
        entries = (self.f_upper_R, self.f_lower_r, self.h1_R, self.h2_R)
        return "certified" if all(e.rigor == "certified" for e in entries) else "heuristic"


@dataclass(frozen=True)
class NonexistenceCertificate:
    lhs: float
    witness: LinearGrowthWitness

    @property
    def passed(self) -> bool:
        return self.lhs < 1.0  # strict: lhs == 1 fails

    @property
    def margin(self) -> float:
        return 1.0 - self.lhs


def check_existence(spec: ProblemSpec, bounds: BoundSet, r: float, R: float) -> ExistenceCertificate:
    """Evaluate the annulus certificate at radii 0 < r < R."""
    if not 0 < r < R:
        raise ParameterError(f"need 0 < r < R, got r={r}, R={R}")
    K = constant_K(spec.kernel, spec.grid)
    Kstar = constant_Kstar(spec.kernel, spec.grid)
    f_up = bounds.f_upper(R)
    f_low = bounds.f_lower(r)
    h1 = bounds.h_upper(1, R)
    h2 = bounds.h_upper(2, R)
    lhs_value = (spec.lam * f_up.value * K
                 + spec.eta1 * spec.gamma1_at_1 * h1.value
                 + spec.eta2 * spec.gamma2_at_1 * h2.value)
    lhs_deriv = (spec.lam * f_up.value * Kstar
                 + spec.eta1 * spec.dgamma1_sup * h1.value
                 + spec.eta2 * spec.dgamma2_sup * h2.value)
    lhs_idx0 = spec.lam * f_low.value * min(K, Kstar)
    ok = max(lhs_value, lhs_deriv) <= R and lhs_idx0 >= r
    if not ok:
        verdict = "fail"
    elif all(e.rigor == "certified" for e in (f_up, f_low, h1, h2)):
        verdict = "certified"
    else:
        verdict = "heuristic-pass"
    return ExistenceCertificate(
        r=r,
        R=R,
        lhs_value_branch=lhs_value,
        lhs_deriv_branch=lhs_deriv,
        lhs_idx0=lhs_idx0,
        upper_margin=R - max(lhs_value, lhs_deriv),
        lower_margin=lhs_idx0 - r,
        verdict=verdict,
        f_upper_R=f_up,
        f_lower_r=f_low,
        h1_R=h1,
        h2_R=h2,
    )


def check_nonexistence(spec: ProblemSpec, witness: LinearGrowthWitness) -> NonexistenceCertificate:
    """Evaluate the linear-growth certificate; caller vets the witness first."""
    K = constant_K(spec.kernel, spec.grid)
    lhs = (spec.lam * witness.tau * K
           + spec.eta1 * witness.xi1 * spec.gamma1_at_1
           + spec.eta2 * witness.xi2 * spec.gamma2_at_1)
    return NonexistenceCertificate(lhs=lhs, witness=witness)
