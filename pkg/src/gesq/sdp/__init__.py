"""Semidefinite-programming bounds with a built-in dense interior-point solver."""

from .bounds import (
    BoundResult,
    fidelity_eigendecomposition,
    fidelity_ggm_bound,
    fidelity_ggm_program,
    fidelity_gm_bound,
    fidelity_gm_program,
    fidelity_program,
    fidelity_sdp,
    ggm_lower_bound,
    gm_bound_program,
    gm_lower_bound,
    ppt_mixture_monotone,
    ppt_mixture_program,
)
from .program import Cone, ConicProgram, HermExpr, MatrixVar, embed_real
from .solver import (
    STATUS_FAILED,
    STATUS_INFEASIBLE,
    STATUS_NEAR,
    STATUS_OPTIMAL,
    SdpSolution,
    SolverFailure,
    SolverOptions,
    audit_feasibility,
    solve,
)

__all__ = [
    "BoundResult",
    "Cone",
    "ConicProgram",
    "HermExpr",
    "MatrixVar",
    "SdpSolution",
    "SolverFailure",
    "SolverOptions",
    "STATUS_FAILED",
    "STATUS_INFEASIBLE",
    "STATUS_NEAR",
    "STATUS_OPTIMAL",
    "audit_feasibility",
    "embed_real",
    "fidelity_eigendecomposition",
    "fidelity_ggm_bound",
    "fidelity_ggm_program",
    "fidelity_gm_bound",
    "fidelity_gm_program",
    "fidelity_program",
    "fidelity_sdp",
    "ggm_lower_bound",
    "gm_bound_program",
    "gm_lower_bound",
    "ppt_mixture_monotone",
    "ppt_mixture_program",
    "solve",
]
