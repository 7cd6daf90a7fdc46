"""Certificates and numerics for perturbed Hammerstein integral equations
with derivative dependence: u = eta1*g1(t)*h1[u] + eta2*g2(t)*h2[u]
+ lambda * int_0^1 k(t,s) f(s, u, u') ds, solved in the cone of
non-negative non-decreasing C1 functions on [0,1]."""

from .bounds import (BoundEntry, BoundSet, FalsificationResult,
                     LinearGrowthWitness, estimate_H, estimate_f_extrema,
                     falsify_linear_growth)
from .certificate import (ExistenceCertificate, NonexistenceCertificate,
                          check_existence, check_nonexistence)
from .errors import (CheckResult, DomainError, EvaluationError, ExprError,
                     HammcertError, IncompleteBoundsError, ParameterError,
                     ProblemFileError, ShapeError)
from .expr import parse, to_source
from .grid import (CONE_TOL, Grid, GridFunction, c1_distance, c1_norm,
                   consistency_defect, eval_at, eval_deriv_at, integrate,
                   integrate_tail, random_cone_function)
from .kernel import (FocalKernel, Kernel, apply_dkernel_row, apply_kernel_row,
                     constant_K, constant_Kstar, kernel_from_exprs)
from .problem import (ProblemSpec, apply_T, load_problem, loads_problem,
                      make_spec, validate_spec)
from .solver import (SolveResult, VerificationReport, multistart_solve,
                     picard_solve, verify_solution)
from .sweep import SweepCell, axis_values, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BoundEntry", "BoundSet", "CheckResult", "CONE_TOL", "DomainError",
    "EvaluationError", "ExistenceCertificate", "ExprError",
    "FalsificationResult", "FocalKernel", "Grid", "GridFunction",
    "HammcertError", "IncompleteBoundsError", "Kernel", "LinearGrowthWitness",
    "NonexistenceCertificate", "ParameterError", "ProblemFileError",
    "ProblemSpec", "ShapeError", "SolveResult", "SweepCell",
    "VerificationReport", "apply_T", "apply_dkernel_row", "apply_kernel_row",
    "axis_values", "c1_distance", "c1_norm", "check_existence",
    "check_nonexistence", "consistency_defect", "constant_K",
    "constant_Kstar", "estimate_H", "estimate_f_extrema", "eval_at",
    "eval_deriv_at", "falsify_linear_growth", "integrate", "integrate_tail",
    "kernel_from_exprs", "load_problem", "loads_problem", "make_spec",
    "multistart_solve", "parse", "picard_solve", "random_cone_function",
    "run_sweep", "to_source", "validate_spec", "verify_solution",
]
