"""Entanglement bounds as semidefinite programs over PPT-type relaxations.

Subspace bounds: the fully-product (or cut-product) overlap minimum of a
subspace projector complement is relaxed to the minimum over states that are
PPT across all (or one) bipartition, giving certified lower bounds on the
geometric and generalized geometric measure of the subspace.

State detectors: the PPT-mixture witness program and fidelity-based
relaxations bound the (generalized) geometric measure of a mixed state from
below; all of them reduce to programs over Hermitian matrix variables with
partial-transpose cones, solved by :mod:`gesq.sdp.solver`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..tensor_core import Bipartition, HermitianOp, Subspace, all_bipartitions
from .program import ConicProgram, HermExpr
from .solver import (
    SdpSolution,
    SolverFailure,
    SolverOptions,
    audit_feasibility,
    solve,
)

_REAL_ATOL = 1e-13


def _is_real(mat: np.ndarray) -> bool:
    return bool(np.abs(mat.imag).max(initial=0.0) < _REAL_ATOL)


def _data_matrix(mat: np.ndarray, real: bool) -> np.ndarray:
    return mat.real if real else mat


@dataclass
class BoundResult:
    """A certified scalar plus the solve it came from."""

    value: float
    solution: SdpSolution
    audit: dict
    per_cut: dict | None = None
    extra: dict = field(default_factory=dict)


def _finish(prog: ConicProgram, options: SolverOptions) -> tuple[SdpSolution, dict]:
    sol = solve(prog, options)
    if not sol.ok:
        raise SolverFailure(sol)
    audit = audit_feasibility(prog, sol.x)
    if not audit["ok"]:
        sol.status = "numerical-failure"
        raise SolverFailure(sol)
    return sol, audit


# ---------------------------------------------------------------------------
# subspace bounds

def gm_bound_program(subspace: Subspace, cuts: list[Bipartition] | None = None) -> ConicProgram:
    """min <P_perp, rho> over unit-trace rho that is PPT across the given cuts."""
    space = subspace.space
    d = space.dim
    if cuts is None:
        cuts = all_bipartitions(space.n_parties)
    pperp = subspace.complement_projector.entries
    real = _is_real(pperp)
    prog = ConicProgram()
    rho = prog.add_matrix_var("rho", d, hermitian=True, real=real)
    prog.add_psd(HermExpr(d).add_var(rho), "rho_psd")
    for cut in cuts:
        prog.add_psd(
            HermExpr(d).add_var(rho, pt=(space.dims, cut.parties)),
            f"rho_pt_{cut}",
        )
    prog.add_trace_equality([(rho, 1.0)], 1.0)
    prog.set_objective([(rho, _data_matrix(pperp, real))])
    return prog


def gm_lower_bound(subspace: Subspace, options: SolverOptions = SolverOptions()) -> BoundResult:
    """Lower bound on the subspace GM: complement overlap minimised over
    states PPT across every bipartition."""
    prog = gm_bound_program(subspace)
    sol, audit = _finish(prog, options)
    return BoundResult(value=max(0.0, sol.objective), solution=sol, audit=audit)


def ggm_lower_bound(subspace: Subspace, options: SolverOptions = SolverOptions()) -> BoundResult:
    """Lower bound on the subspace GGM: the worst single-cut PPT relaxation.

    Returns the outer minimum over cuts plus each cut's inner optimum.
    """
    per_cut = {}
    best = None
    best_sol = None
    best_audit = None
    for cut in all_bipartitions(subspace.space.n_parties):
        prog = gm_bound_program(subspace, cuts=[cut])
        sol, audit = _finish(prog, options)
        val = max(0.0, sol.objective)
        per_cut[cut] = val
        if best is None or val < best:
            best, best_sol, best_audit = val, sol, audit
    return BoundResult(value=best, solution=best_sol, audit=best_audit, per_cut=per_cut)


# ---------------------------------------------------------------------------
# PPT-mixture witness monotone

def ppt_mixture_program(rho: HermitianOp, fully_ppt: bool = False) -> ConicProgram:
    """min tr(W rho) over fully (PPT-)decomposable witnesses with box-bounded parts.

    General mode: W = P_K + Q_K^{T_K} with 0 <= P_K, Q_K <= 1 for every cut K
    (P_K is eliminated against W).  Fully-PPT mode sets P_K = 0, leaving
    0 <= W^{T_K} <= 1 for every cut.
    """
    space = rho.space
    d = space.dim
    cuts = all_bipartitions(space.n_parties)
    real = rho.is_real
    eye = np.eye(d)
    prog = ConicProgram()
    w = prog.add_matrix_var("W", d, hermitian=True, real=real)
    for cut in cuts:
        tag = str(cut)
        if fully_ppt:
            # 0 <= W^{T_K} <= 1
            prog.add_psd(
                HermExpr(d).add_var(w, pt=(space.dims, cut.parties)), f"Wpt_{tag}"
            )
            prog.add_psd(
                HermExpr(d).add_const(eye).add_var(w, coeff=-1.0, pt=(space.dims, cut.parties)),
                f"Wpt_ub_{tag}",
            )
            continue
        p_k = prog.add_matrix_var(f"P_{tag}", d, hermitian=True, real=real)
        prog.add_psd(HermExpr(d).add_var(p_k), f"P_psd_{tag}")
        prog.add_psd(HermExpr(d).add_const(eye).add_var(p_k, coeff=-1.0), f"P_ub_{tag}")
        # Q_K = (W - P_K)^{T_K} within [0, 1]
        q_expr = (
            HermExpr(d)
            .add_var(w, pt=(space.dims, cut.parties))
            .add_var(p_k, coeff=-1.0, pt=(space.dims, cut.parties))
        )
        prog.add_psd(q_expr, f"Q_psd_{tag}")
        ub_expr = (
            HermExpr(d)
            .add_const(eye)
            .add_var(w, coeff=-1.0, pt=(space.dims, cut.parties))
            .add_var(p_k, coeff=1.0, pt=(space.dims, cut.parties))
        )
        prog.add_psd(ub_expr, f"Q_ub_{tag}")
    prog.set_objective([(w, _data_matrix(rho.entries, real))])
    return prog


def ppt_mixture_monotone(
    rho: HermitianOp,
    fully_ppt: bool = False,
    options: SolverOptions = SolverOptions(),
) -> BoundResult:
    """Witness-based genuine-entanglement monotone: max(0, -min tr(W rho)).

    A strictly positive value certifies that ``rho`` is no mixture of
    cut-wise PPT states, hence genuinely multipartite entangled.
    """
    prog = ppt_mixture_program(rho, fully_ppt)
    sol, audit = _finish(prog, options)
    return BoundResult(
        value=max(0.0, -sol.objective),
        solution=sol,
        audit=audit,
        extra={"witness_expectation": sol.objective, "fully_ppt": fully_ppt},
    )


# ---------------------------------------------------------------------------
# fidelity programs

def _support(mat: np.ndarray, tol: float = 1e-12):
    vals, vecs = np.linalg.eigh(mat)
    cut = tol * max(1.0, float(vals.max(initial=0.0)))
    keep = vals > cut
    return vecs[:, keep], vals[keep]


def fidelity_program(rho: HermitianOp, sigma: HermitianOp) -> tuple[ConicProgram, object]:
    """max Re tr X over the PSD block [[rho, X], [X^dag, sigma]].

    Both states are compressed onto their supports first, which removes the
    rank deficiency of the block and restores a strictly feasible interior.
    """
    if rho.space.dim != sigma.space.dim:
        raise ValueError("states live on different spaces")
    real = rho.is_real and sigma.is_real
    u_r, lam_r = _support(_data_matrix(rho.entries, real))
    u_s, lam_s = _support(_data_matrix(sigma.entries, real))
    r, s = lam_r.size, lam_s.size
    prog = ConicProgram()
    x = prog.add_matrix_var("X", r, s, hermitian=False, real=real)
    block = HermExpr(r + s)
    const = np.zeros((r + s, r + s), dtype=np.float64 if real else np.complex128)
    const[:r, :r] = np.diag(lam_r)
    const[r:, r:] = np.diag(lam_s)
    block.add_const(const)
    block.add_var(x, at=(0, r))
    prog.add_psd(block, "fidelity_block")
    # objective: Re tr(U_r X U_s^dag) = Re tr(X B) with B = U_s^dag U_r
    b = u_s.conj().T @ u_r
    prog.set_objective([(x, -b)])     # minimise the negative
    return prog, x


def fidelity_sdp(
    rho: HermitianOp,
    sigma: HermitianOp,
    options: SolverOptions = SolverOptions(),
) -> BoundResult:
    """Fidelity F(rho, sigma) as a semidefinite program."""
    _check_state(rho)
    _check_state(sigma)
    prog, _ = fidelity_program(rho, sigma)
    sol, audit = _finish(prog, options)
    return BoundResult(value=float(np.clip(-sol.objective, 0.0, 1.0)), solution=sol, audit=audit)


def fidelity_eigendecomposition(rho: HermitianOp, sigma: HermitianOp) -> float:
    """Closed-form fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)); oracle for small sizes."""
    vals, vecs = np.linalg.eigh(rho.entries)
    vals = np.clip(vals, 0.0, None)
    rt = (vecs * np.sqrt(vals)) @ vecs.conj().T
    inner = rt @ sigma.entries @ rt
    ivals = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(np.sqrt(ivals).sum())


def _check_state(op: HermitianOp, tol: float = 1e-9) -> None:
    if abs(op.trace() - 1.0) > tol:
        raise ValueError("state must have unit trace")
    if float(op.eigvals().min()) < -tol:
        raise ValueError("state must be positive semidefinite")


def fidelity_gm_program(rho: HermitianOp) -> ConicProgram:
    """max Re tr X over sigma PPT across all cuts and the fidelity block."""
    space = rho.space
    d = space.dim
    real = rho.is_real
    u_r, lam_r = _support(_data_matrix(rho.entries, real))
    r = lam_r.size
    prog = ConicProgram()
    x = prog.add_matrix_var("X", r, d, hermitian=False, real=real)
    sigma = prog.add_matrix_var("sigma", d, hermitian=True, real=real)
    block = HermExpr(r + d)
    const = np.zeros((r + d, r + d), dtype=np.float64 if real else np.complex128)
    const[:r, :r] = np.diag(lam_r)
    block.add_const(const)
    block.add_var(x, at=(0, r))
    block.add_var(sigma, at=(r, r))
    prog.add_psd(block, "fidelity_block")
    for cut in all_bipartitions(space.n_parties):
        prog.add_psd(
            HermExpr(d).add_var(sigma, pt=(space.dims, cut.parties)),
            f"sigma_pt_{cut}",
        )
    prog.add_trace_equality([(sigma, 1.0)], 1.0)
    prog.set_objective([(x, -u_r)])
    return prog


def fidelity_gm_bound(rho: HermitianOp, options: SolverOptions = SolverOptions()) -> BoundResult:
    """Lower bound on the state GM: 1 - max F^2 over states PPT across all cuts."""
    _check_state(rho)
    prog = fidelity_gm_program(rho)
    sol, audit = _finish(prog, options)
    fmax = float(np.clip(-sol.objective, 0.0, 1.0))
    return BoundResult(
        value=max(0.0, 1.0 - fmax * fmax),
        solution=sol,
        audit=audit,
        extra={"max_fidelity": fmax},
    )


def fidelity_ggm_program(rho: HermitianOp) -> ConicProgram:
    """max Re tr X with sigma a PPT mixture: sigma = sum_K sigma_K, each PPT on K."""
    space = rho.space
    d = space.dim
    real = rho.is_real
    u_r, lam_r = _support(_data_matrix(rho.entries, real))
    r = lam_r.size
    cuts = all_bipartitions(space.n_parties)
    prog = ConicProgram()
    x = prog.add_matrix_var("X", r, d, hermitian=False, real=real)
    sig_vars = [
        prog.add_matrix_var(f"sigma_{cut}", d, hermitian=True, real=real) for cut in cuts
    ]
    block = HermExpr(r + d)
    const = np.zeros((r + d, r + d), dtype=np.float64 if real else np.complex128)
    const[:r, :r] = np.diag(lam_r)
    block.add_const(const)
    block.add_var(x, at=(0, r))
    for sv in sig_vars:
        block.add_var(sv, at=(r, r))
    prog.add_psd(block, "fidelity_block")
    for cut, sv in zip(cuts, sig_vars):
        prog.add_psd(HermExpr(d).add_var(sv), f"sigma_psd_{cut}")
        prog.add_psd(
            HermExpr(d).add_var(sv, pt=(space.dims, cut.parties)), f"sigma_pt_{cut}"
        )
    prog.add_trace_equality([(sv, 1.0) for sv in sig_vars], 1.0)
    prog.set_objective([(x, -u_r)])
    return prog


def fidelity_ggm_bound(rho: HermitianOp, options: SolverOptions = SolverOptions()) -> BoundResult:
    """Lower bound on the state GGM: 1 - max F^2 over PPT mixtures."""
    _check_state(rho)
    prog = fidelity_ggm_program(rho)
    sol, audit = _finish(prog, options)
    fmax = float(np.clip(-sol.objective, 0.0, 1.0))
    return BoundResult(
        value=max(0.0, 1.0 - fmax * fmax),
        solution=sol,
        audit=audit,
        extra={"max_fidelity": fmax},
    )
