import json
import math
import os

import numpy as np
import pytest

from gesq.cli import EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE, main, parse_theta
from gesq.reporting import manifest_equal_modulo_timestamps
from gesq.tensor_core import from_json_dict


def run(args, tmp_path, extra=()):
    return main(list(args) + ["--out", str(tmp_path)] + list(extra))


# --- angle parsing -----------------------------------------------------------

def test_parse_theta():
    assert parse_theta("pi/2") == math.pi / 2
    assert parse_theta("pi") == math.pi
    assert parse_theta("2pi/3") == pytest.approx(2 * math.pi / 3)
    assert parse_theta("1.5707963") == pytest.approx(math.pi / 2, abs=1e-6)
    with pytest.raises(Exception):
        parse_theta("one half pi")


# --- construct ----------------------------------------------------------------

def test_construct_writes_subspace(tmp_path):
    code = run(["construct", "--subspace", "S", "--N", "3", "--d", "3",
                "--theta", "1.5707963"], tmp_path)
    assert code == EXIT_OK
    sub = from_json_dict(json.load(open(tmp_path / "subspace_S_N3_d3.json")))
    assert sub.dim == 4

    code = run(["construct", "--subspace", "Q1", "--N", "3", "--d", "4"], tmp_path)
    assert code == EXIT_OK
    sub = from_json_dict(json.load(open(tmp_path / "subspace_Q1_N3_d4.json")))
    assert sub.dim == 33

    code = run(["construct", "--subspace", "ASYM", "--N", "3", "--d", "3"], tmp_path)
    assert code == EXIT_OK
    sub = from_json_dict(json.load(open(tmp_path / "subspace_ASYM_N3_d3.json")))
    assert sub.dim == 1


def test_construct_unknown_label(tmp_path):
    assert run(["construct", "--subspace", "NOPE", "--N", "3"], tmp_path) == EXIT_USAGE


# --- measure -------------------------------------------------------------------

def test_measure_exact(tmp_path):
    code = run(["measure", "--method", "exact", "--target", "GGM",
                "--subspace", "S", "--N", "4", "--d", "5"], tmp_path)
    assert code == EXIT_OK
    rec = json.load(open(tmp_path / "measure_exact_GGM_S_N4_d5.json"))
    assert abs(rec["value"] - 0.09549150281252627) < 1e-12


def test_measure_seesaw_with_optimizer(tmp_path):
    code = run(["measure", "--method", "seesaw", "--target", "GM", "--subspace", "Q2",
                "--N", "4", "--d", "2", "--restarts", "60", "--seed", "5"], tmp_path)
    assert code == EXIT_OK
    rec = json.load(open(tmp_path / "measure_seesaw_GM_Q2_N4_d2.json"))
    assert abs(rec["value"] - 0.1794) < 1e-3
    assert len(rec["optimizer"]) == 4
    factors = [from_json_dict(f) for f in rec["optimizer"]]
    assert all(abs(f.norm - 1) < 1e-10 for f in factors)


def test_measure_sdp_with_program_dump(tmp_path):
    code = run(["measure", "--method", "sdp", "--target", "GM", "--subspace", "Q1",
                "--N", "3", "--d", "3", "--dump-program"], tmp_path)
    assert code == EXIT_OK
    rec = json.load(open(tmp_path / "measure_sdp_GM_Q1_N3_d3.json"))
    assert abs(rec["value"] - 0.19022) < 1e-3
    prog = json.load(open(tmp_path / "measure_sdp_GM_Q1_N3_d3_program.json"))
    assert prog["schema"] == "gesq-conic-1"
    assert rec["feasibility_audit_ok"]


def test_measure_usage_errors(tmp_path):
    # closed-form GM exists only for two parties
    assert run(["measure", "--method", "exact", "--target", "GM",
                "--subspace", "S", "--N", "3", "--d", "3"], tmp_path) == EXIT_USAGE
    # bound needs GM target
    assert run(["measure", "--method", "bound", "--target", "GGM",
                "--subspace", "S", "--N", "3", "--d", "3"], tmp_path) == EXIT_USAGE
    # missing target
    assert run(["measure", "--method", "seesaw", "--subspace", "S",
                "--N", "3", "--d", "3"], tmp_path) == EXIT_USAGE


def test_measure_determinism(tmp_path):
    args = ["measure", "--method", "seesaw", "--target", "GM", "--subspace", "Q2",
            "--N", "3", "--d", "2", "--restarts", "10", "--seed", "3"]
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    run(args, a_dir)
    run(args, b_dir)
    rec_a = json.load(open(a_dir / "measure_seesaw_GM_Q2_N3_d2.json"))
    rec_b = json.load(open(b_dir / "measure_seesaw_GM_Q2_N3_d2.json"))
    assert rec_a == rec_b
    man_a = json.load(open(a_dir / "manifest_measure_seesaw_GM_Q2_N3_d2.json"))
    man_b = json.load(open(b_dir / "manifest_measure_seesaw_GM_Q2_N3_d2.json"))
    assert manifest_equal_modulo_timestamps(man_a, man_b)


def test_seed_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("GESQ_SEED", "99")
    run(["measure", "--method", "seesaw", "--target", "GM", "--subspace", "Q2",
         "--N", "3", "--d", "2", "--restarts", "5"], tmp_path)
    man = json.load(open(tmp_path / "manifest_measure_seesaw_GM_Q2_N3_d2.json"))
    assert man["rng_seed"] == 99


# --- noise-threshold -------------------------------------------------------------

def test_noise_threshold_witness(tmp_path):
    code = run(["noise-threshold", "--subspace", "S", "--N", "3", "--d", "3",
                "--method", "witness", "--target", "gme"], tmp_path)
    assert code == EXIT_OK
    rec = json.load(open(tmp_path / "threshold_witness_gme_S_N3_d3.json"))
    assert abs(rec["p_star"] - 9 / 28) < 1e-12


def test_noise_threshold_usage(tmp_path):
    assert run(["noise-threshold", "--subspace", "S", "--N", "3", "--d", "3",
                "--method", "pptmix", "--target", "ent"], tmp_path) == EXIT_USAGE


# --- reproduce -------------------------------------------------------------------

def test_reproduce_fig1(tmp_path):
    code = run(["reproduce", "--fig1"], tmp_path)
    assert code == EXIT_OK
    assert (tmp_path / "fig1.csv").exists()
    assert (tmp_path / "fig1.png").exists()
    rows = open(tmp_path / "fig1.csv").read().splitlines()
    assert rows[0] == "theta,d,gm"
    assert len(rows) == 1 + 181 * 6


def test_reproduce_table_one(tmp_path):
    code = run(["reproduce", "--table", "I"], tmp_path)
    assert code == EXIT_OK
    for suffix in ("computed", "reference", "diff"):
        assert (tmp_path / f"table_I_{suffix}.csv").exists()
    assert (tmp_path / "table_I.png").exists()
    diff = open(tmp_path / "table_I_diff.csv").read()
    assert "FAIL" not in diff
    assert "skipped" in diff          # the budget-limited cells carry skip markers
    man = json.load(open(tmp_path / "manifest_reproduce_I.json"))
    assert man["command"] == "reproduce"
    assert all("cell" in r for r in man["results"])


def test_reproduce_methods_filter(tmp_path):
    code = run(["reproduce", "--table", "VI", "--methods", "witness"], tmp_path)
    assert code == EXIT_OK
    diff = open(tmp_path / "table_VI_diff.csv").read()
    assert "p_witn_gme" in diff
    assert "p_ppt" not in diff


def test_reproduce_unknown_table(tmp_path):
    assert run(["reproduce", "--table", "IX"], tmp_path) == EXIT_USAGE
    assert run(["reproduce"], tmp_path) == EXIT_USAGE


def test_reproduce_max_dim_skips(tmp_path):
    code = run(["reproduce", "--table", "II", "--max-D", "20"], tmp_path)
    assert code == EXIT_OK
    diff = open(tmp_path / "table_II_diff.csv").read().splitlines()
    computed_rows = [r for r in diff[1:] if ",gated,ok" in r and ",," not in r]
    # only the d=3 cells (D = 18) and the closed-form cells survive the cap
    assert all((",3,gm" in r) or (",3,ggm" in r) or (",ggm," in r) for r in computed_rows)


# --- verify ----------------------------------------------------------------------

def test_verify(tmp_path):
    assert run(["verify"], tmp_path) == EXIT_OK
    man = json.load(open(tmp_path / "manifest_verify.json"))
    checks = {r.get("check") for r in man["results"]}
    assert "ppt_gap_state" in checks
    assert "local_unitary_reduction_d3" in checks
