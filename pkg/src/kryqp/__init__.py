"""Sparse convex QP solving via a piecewise-affine operator iteration,
with interchangeable safeguarded Krylov and Anderson acceleration."""

from .admm_operator import ActiveSet, AdmmOperator, FactorizationFailed
from .anderson_accel import AndersonConfig, AndersonState
from .driver import SafeguardParams, SolveReport, run, safeguard_check
from .krylov_accel import ArnoldiState, KrylovConfig, attempt_set
from .qp_model import (
    Iterate,
    QpProblem,
    ResidualTriple,
    TerminationConfig,
    is_solved,
    kkt_oracle,
    load_problem,
    project_dual_cone,
    residuals,
    save_problem,
)
from .sparse_core import (
    CscMatrix,
    DualVector,
    NotPositiveDefinite,
    SpdFactor,
    factor_solve,
    factor_solve_paired,
    spd_factorize,
    spmv,
    spmv_paired,
    spmv_sym,
    spmv_transpose,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveSet",
    "AdmmOperator",
    "AndersonConfig",
    "AndersonState",
    "ArnoldiState",
    "CscMatrix",
    "DualVector",
    "FactorizationFailed",
    "Iterate",
    "KrylovConfig",
    "NotPositiveDefinite",
    "QpProblem",
    "ResidualTriple",
    "SafeguardParams",
    "SolveReport",
    "SpdFactor",
    "TerminationConfig",
    "attempt_set",
    "factor_solve",
    "factor_solve_paired",
    "is_solved",
    "kkt_oracle",
    "load_problem",
    "project_dual_cone",
    "residuals",
    "run",
    "safeguard_check",
    "save_problem",
    "spd_factorize",
    "spmv",
    "spmv_paired",
    "spmv_sym",
    "spmv_transpose",
]
