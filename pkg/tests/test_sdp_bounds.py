import math

import numpy as np
import pytest

from gesq.sdp import (
    SolverFailure,
    SolverOptions,
    fidelity_eigendecomposition,
    fidelity_ggm_bound,
    fidelity_gm_bound,
    fidelity_sdp,
    ggm_lower_bound,
    gm_bound_program,
    gm_lower_bound,
    ppt_mixture_monotone,
)
from gesq.subspaces import GesParams, ges_2xd_pow, ppt_gap_state, q2_subspace
from gesq.tensor_core import (
    HermitianOp,
    HilbertSpace,
    full_space_subspace,
    kron,
    random_state,
)
from gesq.variational import SeesawConfig, seesaw_gm


def proj_state(sub):
    return HermitianOp(sub.projector.entries / sub.dim, sub.space)


def random_density(space, rng, rank=None):
    d = space.dim
    rank = rank or d
    a = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = a @ a.conj().T
    return HermitianOp(m / np.trace(m).real, space)


# --- subspace bounds ---------------------------------------------------------

def test_gm_bound_full_space_is_zero():
    sub = full_space_subspace(HilbertSpace((2, 2)))
    assert gm_lower_bound(sub).value < 1e-7


def test_gm_bound_gap_cell():
    # the one case where the relaxation provably undershoots the product
    # overlap minimum: the PPT gap state is feasible with a lower objective
    sub = ges_2xd_pow(GesParams(3, 3, math.pi / 2))
    res = gm_lower_bound(sub)
    assert abs(res.value - 0.41416) < 1e-3
    assert res.value < 3 / 7 - 5e-3
    assert res.audit["ok"]

    gap_state, report = ppt_gap_state()
    # the gap state is feasible for the same program, with known objective
    prog = gm_bound_program(sub)
    feasible_obj = float(report.overlap_with_complement)
    assert res.value <= feasible_obj + 1e-6
    assert abs(feasible_obj - 0.42142781690140846) < 1e-12


def test_ggm_bound_matches_closed_form():
    sub = ges_2xd_pow(GesParams(3, 3, math.pi / 2))
    res = ggm_lower_bound(sub)
    assert abs(res.value - 0.25) < 1e-4
    assert len(res.per_cut) == 3
    for val in res.per_cut.values():
        assert abs(val - 0.25) < 1e-4


def test_sandwich_property():
    cfg = SeesawConfig(restarts=40, rng_seed=17)
    for sub in [ges_2xd_pow(GesParams(3, 3, math.pi / 2)), q2_subspace(3, 2)]:
        saw = seesaw_gm(sub, cfg).entanglement
        assert gm_lower_bound(sub).value <= saw + 1e-6


# --- PPT mixture monotone ------------------------------------------------------

def test_ppt_mixture_table_values():
    rho = proj_state(ges_2xd_pow(GesParams(3, 3, math.pi / 2)))
    assert abs(ppt_mixture_monotone(rho).value - 0.3008) < 2e-3
    assert abs(ppt_mixture_monotone(rho, fully_ppt=True).value - 0.2253) < 2e-3


def test_ppt_mixture_undetects_product_state(rng):
    spaces = [HilbertSpace((2,)), HilbertSpace((2,)), HilbertSpace((2,))]
    rho = kron(
        kron(random_state(spaces[0], rng).projector(), random_state(spaces[1], rng).projector()),
        random_state(spaces[2], rng).projector(),
    )
    assert ppt_mixture_monotone(rho).value == 0.0


# --- fidelity ------------------------------------------------------------------

def test_fidelity_identical_states(rng):
    rho = random_density(HilbertSpace((2, 2)), rng)
    assert abs(fidelity_sdp(rho, rho).value - 1.0) < 1e-6


def test_fidelity_orthogonal_pure_states():
    space = HilbertSpace((2,))
    z0 = HermitianOp(np.diag([1.0, 0.0]), space)
    z1 = HermitianOp(np.diag([0.0, 1.0]), space)
    assert fidelity_sdp(z0, z1).value < 1e-6


def test_fidelity_pure_vs_mixed():
    space = HilbertSpace((2,))
    z0 = HermitianOp(np.diag([1.0, 0.0]), space)
    eye = HermitianOp(np.eye(2) / 2, space)
    assert abs(fidelity_sdp(z0, eye).value - 1 / math.sqrt(2)) < 1e-6


def test_fidelity_against_eigendecomposition(rng):
    space = HilbertSpace((2, 3))
    for _ in range(4):
        rho = random_density(space, rng)
        sigma = random_density(space, rng)
        f1 = fidelity_sdp(rho, sigma).value
        f2 = fidelity_eigendecomposition(rho, sigma)
        assert abs(f1 - f2) < 1e-6


def test_fidelity_symmetric(rng):
    space = HilbertSpace((2, 2))
    rho = random_density(space, rng)
    sigma = random_density(space, rng, rank=2)
    assert abs(fidelity_sdp(rho, sigma).value - fidelity_sdp(sigma, rho).value) < 1e-7


def test_fidelity_rank_deficient_inputs(rng):
    # support compression must keep the program strictly feasible
    space = HilbertSpace((2, 2, 2))
    rho = random_density(space, rng, rank=2)
    sigma = random_density(space, rng, rank=3)
    f1 = fidelity_sdp(rho, sigma).value
    f2 = fidelity_eigendecomposition(rho, sigma)
    assert abs(f1 - f2) < 1e-6


# --- fidelity relaxation bounds -------------------------------------------------

def test_fidelity_gm_bound_values():
    rho = proj_state(ges_2xd_pow(GesParams(3, 3, math.pi / 2)))
    res = fidelity_gm_bound(rho)
    assert abs(res.value - 0.4150) < 2e-3
    assert res.audit["ok"]


def test_fidelity_gm_bound_maximally_mixed():
    space = HilbertSpace((2, 2))
    rho = HermitianOp(np.eye(4) / 4, space)
    assert fidelity_gm_bound(rho).value < 1e-6


def test_fidelity_ggm_bound_mixture_set():
    # cross-validated value of the mixture formulation (components are states
    # PPT across their own cut); agrees with an independent external solver
    rho = proj_state(q2_subspace(3, 2))
    res = fidelity_ggm_bound(rho)
    assert abs(res.value - 0.09621) < 2e-3
    gm = fidelity_gm_bound(rho).value
    assert res.value <= gm + 1e-6


def test_bounds_reject_non_states(rng):
    space = HilbertSpace((2, 2))
    bad = HermitianOp(np.eye(4), space)       # trace 4
    with pytest.raises(ValueError):
        fidelity_gm_bound(bad)


def test_gm_bound_cross_check_cvxpy():
    cvxpy = pytest.importorskip("cvxpy")
    import cvxpy as cp

    sub = ges_2xd_pow(GesParams(2, 3, math.pi / 2))   # bipartite, D = 6
    space = sub.space
    d = space.dim
    pperp = sub.complement_projector.entries.real
    rho = cp.Variable((d, d), symmetric=True)
    # partial transpose over the qubit via explicit index permutation
    perm = np.zeros((d * d, d * d))
    for i1 in range(2):
        for k1 in range(3):
            for i2 in range(2):
                for k2 in range(3):
                    r, c = i1 * 3 + k1, i2 * 3 + k2
                    r2, c2 = i2 * 3 + k1, i1 * 3 + k2
                    perm[r2 * d + c2, r * d + c] = 1
    pt = cp.reshape(perm @ cp.vec(rho, order="C"), (d, d), order="C")
    prob = cp.Problem(
        cp.Minimize(cp.trace(pperp @ rho)),
        [rho >> 0, pt >> 0, cp.trace(rho) == 1],
    )
    external = prob.solve(solver=cp.CVXOPT)
    mine = gm_lower_bound(sub).value
    assert abs(mine - external) < 1e-6
