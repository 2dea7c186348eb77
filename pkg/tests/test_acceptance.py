"""Acceptance suite: one test per numbered criterion, at the stated tolerances.

Each test prints a PASS/FAIL line (visible with ``pytest -s`` or in the
failure report).  Criterion 9's mixture-fidelity cell is expected to stay
red: the documented program provably optimizes to a different value than the
bundled reference number (see notes/decisions.md at the repository root of
the development tree, and README "Known discrepancy").
"""

import functools
import math
import os
import time
from fractions import Fraction

import numpy as np
import pytest

from gesq import exact, noise
from gesq.sdp import (
    SolverOptions,
    fidelity_ggm_bound,
    fidelity_gm_bound,
    ggm_lower_bound,
    gm_lower_bound,
    ppt_mixture_monotone,
)
from gesq.subspaces import (
    GesParams,
    antisymmetric_subspace,
    ces_2xd,
    ges_2xd_pow,
    ppt_gap_state,
    q1_subspace,
    q2_subspace,
    w_span_subspace,
)
from gesq.tensor_core import (
    HermitianOp,
    HilbertSpace,
    all_bipartitions,
    partial_transpose,
)
from gesq.variational import SeesawConfig, ggm_via_cuts, grid_product_maximum, seesaw_gm

FULL = bool(int(os.environ.get("GESQ_ACCEPT_FULL", "0")))
PI2 = math.pi / 2


def criterion(number, description):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"criterion {number:2d} [{description}]: FAIL")
                raise
            print(f"criterion {number:2d} [{description}]: PASS")
        return wrapper
    return deco


def proj_state(sub):
    return HermitianOp(sub.projector.entries / sub.dim, sub.space)


@criterion(1, "closed-form generalized measure grid")
def test_criterion_01_exact_formula_suite():
    published = {3: 0.25000, 4: 0.14645, 5: 0.09549, 6: 0.06699, 7: 0.04952, 8: 0.03806}
    start = time.perf_counter()
    for d, ref in published.items():
        for n in (2, 3, 4, 5):
            val = exact.ggm_ges_exact(n, d, PI2).value
            assert abs(val - math.sin(math.pi / (2 * d)) ** 2) < 1e-15
            assert round(val, 5) == ref
    assert time.perf_counter() - start < 1.0


@criterion(2, "seesaw geometric measure, three parties")
def test_criterion_02_seesaw_gm():
    start = time.perf_counter()
    cfg = SeesawConfig(restarts=200, rng_seed=0)
    res3 = seesaw_gm(ges_2xd_pow(GesParams(3, 3, PI2)), cfg)
    assert abs(res3.entanglement - 3 / 7) < 1e-4
    res4 = seesaw_gm(ges_2xd_pow(GesParams(3, 4, PI2)), cfg)
    assert abs(res4.entanglement - 0.26543) < 1e-4
    assert time.perf_counter() - start < 120.0


@criterion(3, "product-overlap upper bound")
def test_criterion_03_gm_upper_bound():
    assert exact.gm_upper_bound(3, 3, rational=True) == Fraction(31, 72)
    assert abs(exact.gm_upper_bound(4, 3) - 0.5625) < 5e-4
    assert abs(exact.gm_upper_bound(4, 3) - 0.563) < 1e-3   # printed rounding


@pytest.mark.slow
@criterion(4, "PPT-relaxation subspace bounds, qubit-qudit family")
def test_criterion_04_sdp_table():
    published_ggm = {3: 0.25000, 4: 0.14645, 5: 0.09549, 6: 0.06699, 7: 0.04952, 8: 0.03806}
    published_gm = {3: 0.41416, 4: 0.26543, 5: 0.17837, 6: 0.12742, 7: 0.09530, 8: 0.07384}
    dims = (3, 4, 5, 6, 7, 8) if FULL else (3, 4, 5, 6)
    for d in dims:
        sub = ges_2xd_pow(GesParams(3, d, PI2))
        ggm = ggm_lower_bound(sub)
        assert abs(ggm.value - published_ggm[d]) < 1e-4, f"GGM bound off at d={d}"
        gm = gm_lower_bound(sub)
        assert abs(gm.value - published_gm[d]) < 1e-3, f"GM bound off at d={d}"
        if d == 3:
            assert gm.value < 3 / 7 - 5e-3     # the gap must reproduce
        assert gm.audit["ok"] and ggm.audit["ok"]


@criterion(5, "exact PPT gap certificate")
def test_criterion_05_gap_state():
    start = time.perf_counter()
    state, report = ppt_gap_state()
    for parties, val in report.ppt_min_eigenvalues.items():
        assert val >= -1e-10, f"partial transpose over {parties} not PSD"
    assert report.is_ppt_all_cuts
    target = Fraction(239371, 568000)
    assert report.overlap_with_complement == target          # exact rational mode
    assert abs(float(report.overlap_with_complement) - float(target)) < 1e-12
    assert time.perf_counter() - start < 1.0


@criterion(6, "orthocomplement families: dimensions and bounds")
def test_criterion_06_q_family():
    assert [q1_subspace(3, d).dim for d in (3, 4, 5)] == [10, 33, 76]
    assert [q2_subspace(3, d).dim for d in (3, 4, 5)] == [12, 36, 80]
    q1 = ggm_lower_bound(q1_subspace(3, 3))
    assert abs(q1.value - 0.025078) < 5e-4
    q2 = ggm_lower_bound(q2_subspace(3, 3))
    assert abs(q2.value - 4.8023e-3) < 2e-4


@criterion(7, "qubit family: seesaw and relaxation agree")
def test_criterion_07_qubit_family():
    published = {3: 0.2640, 4: 0.1794, 5: 0.1213}
    cfg = SeesawConfig(restarts=200, rng_seed=0)
    for n, ref in published.items():
        sub = q2_subspace(n, 2)
        saw = seesaw_gm(sub, cfg).entanglement
        sdp = gm_lower_bound(sub).value
        assert abs(saw - ref) < 1e-3, f"seesaw off at N={n}"
        assert abs(saw - sdp) < 1e-4, f"seesaw and relaxation disagree at N={n}"


@criterion(8, "antisymmetric subspace values by variational methods")
def test_criterion_08_antisymmetric():
    cfg = SeesawConfig(restarts=200, rng_seed=0)
    for d in (3, 4):
        sub = antisymmetric_subspace(d, 3)
        gm = seesaw_gm(sub, cfg).entanglement
        assert abs(gm - (1 - 1 / math.factorial(3))) < 1e-4, f"GM off at d={d}"
        ggm = ggm_via_cuts(sub, cfg).value
        assert abs(ggm - (1 - 1 / 3)) < 1e-4, f"GGM off at d={d}"


@criterion(9, "mixed-state detectors (witness monotones, fidelity bound)")
def test_criterion_09_detectors():
    start = time.perf_counter()
    rho = proj_state(ges_2xd_pow(GesParams(3, 3, PI2)))
    assert abs(ppt_mixture_monotone(rho).value - 0.3008) < 2e-3
    assert abs(ppt_mixture_monotone(rho, fully_ppt=True).value - 0.2253) < 2e-3
    assert abs(fidelity_gm_bound(rho).value - 0.4150) < 2e-3
    assert time.perf_counter() - start < 900.0


@criterion(9, "mixed-state detectors: mixture-fidelity cell")
def test_criterion_09_fidelity_ggm_cell():
    # Expected red: the documented mixture program (components PSD and PPT
    # across their own cut) provably optimizes to 0.2498 for this state --
    # confirmed against an independent external solver -- while the bundled
    # reference value is 0.2286.  See README "Known discrepancy".
    rho = proj_state(ges_2xd_pow(GesParams(3, 3, PI2)))
    assert abs(fidelity_ggm_bound(rho).value - 0.2286) < 2e-3


@pytest.mark.slow
@criterion(10, "white-noise thresholds")
def test_criterion_10_noise_thresholds():
    start = time.perf_counter()
    sub = ges_2xd_pow(GesParams(3, 3, PI2))
    gme = noise.threshold_witness(sub, "gme", epsilon=exact.ggm_ges_exact(3, 3, PI2).value)
    assert gme.p_star == pytest.approx(9 / 28, abs=1e-12)    # closed form, exact
    assert abs(gme.p_star - 0.321) < 5e-4
    ent = noise.threshold_witness(sub, "ent", epsilon=3 / 7)
    assert ent.p_star == pytest.approx(27 / 49, abs=1e-12)
    assert abs(ent.p_star - 0.551) < 5e-4

    ppt = noise.threshold_bisect(sub, "pptmix", tol_p=2e-3)
    assert abs(ppt.p_star - 0.409) < 5e-3
    fid = noise.threshold_bisect(sub, "fidelity-GM", tol_p=2e-3)
    assert abs(fid.p_star - 0.692) < 5e-3
    # ordering: witness <= PPT-mixture <= fidelity(plain entanglement)
    assert gme.p_star <= ppt.p_star + 1e-9
    assert ppt.p_star <= fid.p_star + 1e-9
    assert gme.p_star <= ent.p_star + 1e-9
    assert time.perf_counter() - start < 2700.0


# --- criterion 11: property suites without published numbers -------------------

GRID_CASES = [
    lambda: ces_2xd(3, PI2),
    lambda: ces_2xd(4, PI2),
    lambda: ces_2xd(8, PI2),          # total dimension 16
    lambda: ces_2xd(3, math.pi / 3),
    lambda: q2_subspace(3, 2),
    lambda: w_span_subspace(3),
]


@pytest.mark.slow
@criterion(11, "seesaw versus dense grid oracle at small dimension")
def test_criterion_11_grid_oracle():
    cfg = SeesawConfig(restarts=60, rng_seed=1)
    for build in GRID_CASES:
        sub = build()
        assert sub.space.dim <= 16
        grid = grid_product_maximum(sub, resolution=math.pi / 60)
        saw = seesaw_gm(sub, cfg).overlap
        assert abs(grid - saw) <= 2e-3, f"oracle disagrees for {sub.label}"


@criterion(11, "partial-transpose involution and projector idempotence")
def test_criterion_11_structural_properties():
    rng = np.random.default_rng(7)
    for dims in [(2, 2), (2, 3), (2, 2, 2), (2, 3, 3), (4, 4, 4)]:
        space = HilbertSpace(dims)
        m = rng.standard_normal((space.dim,) * 2) + 1j * rng.standard_normal((space.dim,) * 2)
        h = HermitianOp(0.5 * (m + m.conj().T), space)
        for cut in all_bipartitions(len(dims)):
            twice = partial_transpose(partial_transpose(h, cut), cut)
            assert np.abs(twice.entries - h.entries).max() < 1e-12
    for sub in [ges_2xd_pow(GesParams(3, 3, PI2)), q1_subspace(3, 3),
                q2_subspace(3, 2), antisymmetric_subspace(3, 3), w_span_subspace(4)]:
        p = sub.projector.entries
        assert np.abs(p @ p - p).max() < 1e-10
        assert abs(np.trace(p).real - sub.dim) < 1e-9


@pytest.mark.slow
@criterion(11, "relaxation never exceeds the variational value")
def test_criterion_11_sandwich_everywhere():
    cfg = SeesawConfig(restarts=80, rng_seed=3)
    subs = [
        ges_2xd_pow(GesParams(3, 3, PI2)),
        ges_2xd_pow(GesParams(3, 4, PI2)),
        q1_subspace(3, 3),
        q2_subspace(3, 2),
        q2_subspace(3, 3),
        antisymmetric_subspace(3, 3),
        w_span_subspace(3),
    ]
    for sub in subs:
        saw_gm = seesaw_gm(sub, cfg).entanglement
        assert gm_lower_bound(sub).value <= saw_gm + 1e-6, sub.label
        saw_ggm = ggm_via_cuts(sub, cfg).value
        assert ggm_lower_bound(sub).value <= saw_ggm + 1e-6, sub.label
        assert saw_ggm <= saw_gm + 1e-8, sub.label


@criterion(11, "withheld cells are marked, not fabricated")
def test_criterion_11_dashes_not_reproduced():
    from gesq.reporting import load_reference

    table5 = load_reference("V")
    keys = {(c.subspace, c.d, c.quantity) for c in table5}
    # the desk-scale dashes: no reference cells exist for them at all
    assert ("S", 7, "e_ppt") not in keys
    assert ("S", 8, "e_ppt") not in keys
    assert ("S", 8, "ef_gm") not in keys
    assert ("Q1", 5, "e_ppt") not in keys
    # the external convex-roof algorithm column is out of scope entirely
    assert not any("algor" in c.quantity for c in table5)
