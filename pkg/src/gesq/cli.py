"""Command-line front end: construct, measure, noise-threshold, reproduce, verify.

Exit codes: 0 all good, 2 tolerance violation, 3 solver failure, 64 usage
error.  The default RNG seed is 0 and can be overridden with the
``GESQ_SEED`` environment variable or ``--seed``.  Every command writes a
run manifest (JSON) next to its outputs; rerunning with identical flags
reproduces the manifest modulo wall-clock entries.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__, exact, noise, subspaces, tensor_core
from .reporting import (
    Cell,
    RunManifest,
    diff_cells,
    load_reference,
    render_curve_figure,
    render_table_figure,
    write_cells,
    write_diff,
)
from .sdp import (
    SolverFailure,
    SolverOptions,
    fidelity_ggm_bound,
    fidelity_ggm_program,
    fidelity_gm_bound,
    fidelity_gm_program,
    ggm_lower_bound,
    gm_bound_program,
    gm_lower_bound,
    ppt_mixture_monotone,
    ppt_mixture_program,
)
from .variational import SeesawConfig, ggm_via_cuts, seesaw_gm

EXIT_OK = 0
EXIT_TOLERANCE = 2
EXIT_SOLVER = 3
EXIT_USAGE = 64

TABLES = ("I", "II", "III", "IV", "Q2D", "V", "VI")


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


class UsageError(RuntimeError):
    pass


def parse_theta(text: str) -> float:
    """Angles in radians; 'pi', 'pi/2', '2pi/3' style literals accepted."""
    text = text.strip().lower().replace(" ", "")
    m = re.fullmatch(r"(\d*\.?\d*)\*?pi(?:/(\d+\.?\d*))?", text)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse angle {text!r}")


def default_seed() -> int:
    return int(os.environ.get("GESQ_SEED", "0"))


def _build_subspace(label, n, d, theta):
    try:
        return subspaces.by_label(label, n, d, theta)
    except ValueError as exc:
        raise UsageError(str(exc))


def _proj_state(sub, p=0.0):
    return noise.make_noisy_state(sub, p)


# ---------------------------------------------------------------------------
# epsilon (subspace measure) sources for witnesses and thresholds

def subspace_epsilon(label, n, d, theta, target, seed, restarts=200):
    """GGM (gme) or GM (ent) of a subspace: exact where known, else variational."""
    label = label.upper()
    if label == "S":
        if target == "gme":
            return exact.ggm_ges_exact(n, d, theta).value
        if n == 2:
            return exact.gm_ces_exact(d, theta).value
        sub = _build_subspace(label, n, d, theta)
        return seesaw_gm(sub, SeesawConfig(restarts=restarts, rng_seed=seed)).entanglement
    if label == "ASYM":
        return exact.antisym_ggm(n) if target == "gme" else exact.antisym_gm(n)
    sub = _build_subspace(label, n, d, theta)
    cfg = SeesawConfig(restarts=restarts, rng_seed=seed)
    if target == "gme":
        return ggm_via_cuts(sub, cfg).value
    return seesaw_gm(sub, cfg).entanglement


# ---------------------------------------------------------------------------
# table reproduction plans

@dataclass(frozen=True)
class Budget:
    max_dim: int = 4096
    tier_limit: int = 1
    restarts: int = 200
    seed: int = 0
    jobs: int = 1
    bisect_tol: float = 2e-3


def _space_dim(label, n, d):
    if label == "S":
        return 2 * d ** (n - 1)
    return d ** n


def compute_cell(task: tuple):
    """One reproduction task; top-level so a process pool can run it."""
    kind, label, n, d, seed, restarts, extra = task
    theta = math.pi / 2
    cfg = SeesawConfig(restarts=restarts, rng_seed=seed)
    opts = SolverOptions()
    if kind == "gm_bound":
        return float(exact.gm_upper_bound(n, d))
    if kind == "ggm_exact":
        return exact.ggm_ges_exact(n, d, theta).value
    if kind == "dim":
        return float(_build_subspace(label, n, d, theta).dim)
    sub = _build_subspace(label, n, d, theta)
    if kind == "seesaw_gm":
        return seesaw_gm(sub, cfg).entanglement
    if kind == "seesaw_ggm":
        return ggm_via_cuts(sub, cfg).value
    if kind == "sdp_gm":
        return gm_lower_bound(sub, opts).value
    if kind == "sdp_ggm":
        return ggm_lower_bound(sub, opts).value
    if kind == "e_ppt":
        return ppt_mixture_monotone(_proj_state(sub), options=opts).value
    if kind == "e_ppt_fully":
        return ppt_mixture_monotone(_proj_state(sub), fully_ppt=True, options=opts).value
    if kind == "ef_gm":
        return fidelity_gm_bound(_proj_state(sub), options=opts).value
    if kind == "ef_ggm":
        return fidelity_ggm_bound(_proj_state(sub), options=opts).value
    if kind in ("witn_gme", "witn_ent"):
        target = "gme" if kind == "witn_gme" else "ent"
        eps = subspace_epsilon(label, n, d, theta, target, seed, restarts)
        return noise.threshold_witness(sub, target, float(eps)).p_star
    if kind in ("bisect_ppt", "bisect_f_gme", "bisect_f_ent"):
        detector = {"bisect_ppt": "pptmix", "bisect_f_gme": "fidelity-GGM",
                    "bisect_f_ent": "fidelity-GM"}[kind]
        return noise.threshold_bisect(sub, detector, tol_p=extra or 2e-3, options=opts).p_star
    raise ValueError(f"unknown task kind {kind!r}")


def _plan(table: str, budget: Budget):
    """(reference-cell key, task, tier) triples for one table."""
    plan = []

    def add(label, n, d, quantity, kind, tier, extra=None):
        plan.append(((table, label, n, d, quantity),
                     (kind, label, n, d, budget.seed, budget.restarts, extra), tier))

    if table == "I":
        for d in (3, 4, 5):
            for n in (3, 4, 5, 6):
                if (d, n) != (5, 6):
                    add("S", n, d, "gm", "seesaw_gm", 1 if n <= 4 else 2)
                add("S", n, d, "gm_bound", "gm_bound", 0)
    elif table == "II":
        for d in range(3, 9):
            tier = 1 if d <= 6 else 2
            add("S", 3, d, "gm", "seesaw_gm", tier)
            add("S", 3, d, "gm_sdp", "sdp_gm", tier)
            add("S", 3, d, "ggm", "ggm_exact", 0)
            add("S", 3, d, "ggm_sdp", "sdp_ggm", tier)
    elif table == "III":
        for d in (3, 4, 5):
            tier = 1 if d <= 4 else 2
            add("Q1", 3, d, "dim", "dim", 0)
            add("Q1", 3, d, "gm_sdp", "sdp_gm", tier)
            add("Q1", 3, d, "ggm_sdp", "sdp_ggm", tier)
            if d == 3:
                add("Q1", 3, d, "gm_num", "seesaw_gm", 1)
            add("Q1", 3, d, "ggm_num", "seesaw_ggm", tier)
    elif table == "IV":
        for n in (3, 4, 5, 6):
            tier = 1 if n <= 5 else 2
            add("Q2", n, 2, "dim", "dim", 0)
            add("Q2", n, 2, "gm", "seesaw_gm", tier)
            add("Q2", n, 2, "gm_sdp", "sdp_gm", tier)
            add("Q2", n, 2, "ggm_sdp", "sdp_ggm", tier)
    elif table == "Q2D":
        for d in (3, 4, 5):
            tier = 1 if d <= 4 else 2
            add("Q2", 3, d, "dim", "dim", 0)
            add("Q2", 3, d, "gm_sdp", "sdp_gm", tier)
            add("Q2", 3, d, "ggm_sdp", "sdp_ggm", tier)
            add("Q2", 3, d, "ggm_num", "seesaw_ggm", tier)
    elif table == "V":
        cells = {
            "S": {2: 1, 3: 1, 4: 1, 5: 2, 6: 2, 7: 2, 8: 2},
            "Q1": {2: 1, 3: 1, 4: 2},
            "Q2": {2: 1, 3: 1, 4: 2},
        }
        heavy_general = {("S", 7), ("S", 8)}   # dashes: general witness program too large
        for label, tiers in cells.items():
            for d, tier in tiers.items():
                if (label, d) not in heavy_general:
                    add(label, 3, d, "e_ppt", "e_ppt", tier)
                add(label, 3, d, "e_ppt_fully", "e_ppt_fully", tier)
                if (label, d) != ("S", 8):
                    add(label, 3, d, "ef_gm", "ef_gm", tier)
                if (label, d) not in heavy_general:
                    add(label, 3, d, "ef_ggm", "ef_ggm", tier)
    elif table == "VI":
        witness_tiers = {"S": {2: 1, 3: 1, 4: 1, 5: 2, 6: 2},
                         "Q1": {2: 1, 3: 1, 4: 2, 5: 2},
                         "Q2": {2: 1, 3: 1, 4: 2, 5: 2}}
        bisect_tiers = {"S": {2: 1, 3: 1, 4: 2, 5: 3, 6: 3},
                        "Q1": {2: 1, 3: 2, 4: 3},
                        "Q2": {2: 1, 3: 2, 4: 3}}
        for label, tiers in witness_tiers.items():
            for d, tier in tiers.items():
                add(label, 3, d, "p_witn_gme", "witn_gme", tier)
                add(label, 3, d, "p_witn_ent", "witn_ent", tier)
        for label, tiers in bisect_tiers.items():
            for d, tier in tiers.items():
                add(label, 3, d, "p_ppt", "bisect_ppt", tier, budget.bisect_tol)
                add(label, 3, d, "p_f_gme", "bisect_f_gme", tier, budget.bisect_tol)
                add(label, 3, d, "p_f_ent", "bisect_f_ent", tier, budget.bisect_tol)
    else:
        raise UsageError(f"unknown table {table!r}; choose from {TABLES} or fig1")
    return plan


_METHOD_CLASSES = {
    "witness": ("p_witn_gme", "p_witn_ent"),
    "pptmix": ("p_ppt", "e_ppt", "e_ppt_fully"),
    "fidelity": ("p_f_gme", "p_f_ent", "ef_gm", "ef_ggm"),
    "sdp": ("gm_sdp", "ggm_sdp"),
    "seesaw": ("gm", "gm_num", "ggm_num"),
    "exact": ("ggm", "gm_bound", "dim"),
}


def _method_filter(methods: str | None):
    if not methods:
        return None
    allowed = set()
    for name in methods.split(","):
        name = name.strip()
        if name not in _METHOD_CLASSES:
            raise UsageError(
                f"unknown method class {name!r}; choose from {sorted(_METHOD_CLASSES)}"
            )
        allowed.update(_METHOD_CLASSES[name])
    return allowed


def run_table(table: str, budget: Budget, out_dir: Path, manifest: RunManifest,
              methods: str | None = None):
    reference = load_reference(table)
    allowed = _method_filter(methods)
    if allowed is not None:
        reference = [c for c in reference if c.quantity in allowed]
    ref_keys = {c.key() for c in reference}
    plan = [(key, task, tier) for key, task, tier in _plan(table, budget) if key in ref_keys]

    runnable, skipped = [], []
    for key, task, tier in plan:
        label, n, d = key[1], key[2], key[3]
        if tier > budget.tier_limit or _space_dim(label, n, d) > budget.max_dim:
            skipped.append(key)
        else:
            runnable.append((key, task))

    if budget.jobs > 1 and len(runnable) > 1:
        with ProcessPoolExecutor(max_workers=budget.jobs) as pool:
            values = list(pool.map(compute_cell, [task for _, task in runnable]))
    else:
        values = [compute_cell(task) for _, task in runnable]

    computed = []
    for (key, _), value in zip(runnable, values):
        computed.append(Cell(*key, value=float(value)))
    for key in skipped:
        computed.append(Cell(*key, value=None, gate="skipped", note="skipped: beyond budget"))

    write_cells(out_dir / f"table_{table}_computed.csv", computed)
    write_cells(out_dir / f"table_{table}_reference.csv", reference)
    diffs = diff_cells(reference, computed)
    write_diff(out_dir / f"table_{table}_diff.csv", diffs)
    render_table_figure(out_dir / f"table_{table}.png", table, diffs)

    n_fail = sum(1 for e in diffs if not e.ok)
    n_skip = sum(1 for e in diffs if e.delta is None)
    for e in diffs:
        manifest.add_result(
            {
                "cell": list(e.key),
                "reference": e.reference,
                "computed": e.computed,
                "abs_delta": e.delta,
                "tolerance": e.tolerance,
                "gate": e.gate,
                "ok": e.ok,
            }
        )
    print(f"table {table}: {len(diffs) - n_skip} cells computed, {n_skip} skipped, "
          f"{n_fail} outside tolerance")
    for e in diffs:
        if not e.ok:
            print(f"  FAIL {e.key}: computed {e.computed!r} vs reference {e.reference!r} "
                  f"(|delta| {e.delta:.2e} > tol {e.tolerance:.1e})")
    return EXIT_TOLERANCE if n_fail else EXIT_OK


def run_fig1(out_dir: Path, manifest: RunManifest):
    rows = exact.figure1_rows(theta_points=181)
    csv_path = out_dir / "fig1.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("theta,d,gm\n")
        for theta, d, val in rows:
            fh.write(f"{theta!r},{d},{val!r}\n")
    render_curve_figure(out_dir / "fig1.png", rows)
    peak = max(v for t, d, v in rows if d == 2)
    ok = abs(peak - 0.5) < 1e-12
    manifest.add_result({"check": "d2_peak", "value": peak, "ok": ok})
    print(f"fig1: wrote {csv_path} and fig1.png; qubit-curve peak {peak:.6f}")
    return EXIT_OK if ok else EXIT_TOLERANCE


# ---------------------------------------------------------------------------
# subcommands

def cmd_construct(args) -> int:
    theta = parse_theta(args.theta)
    sub = _build_subspace(args.subspace, args.N, args.d, theta)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = f"subspace_{args.subspace.upper()}_N{args.N}_d{args.d}.json"
    tensor_core.save_json(sub, out_dir / name)
    manifest = RunManifest(
        command="construct",
        parameters={"subspace": args.subspace.upper(), "N": args.N, "d": args.d, "theta": theta},
        rng_seed=args.seed,
        solver_settings={},
    )
    manifest.add_result({"dim": sub.dim, "space_dims": list(sub.space.dims), "file": name})
    manifest.write(out_dir / f"manifest_construct_{args.subspace.upper()}_N{args.N}_d{args.d}.json")
    print(f"{sub.label}: dimension {sub.dim} inside {'x'.join(map(str, sub.space.dims))}")
    return EXIT_OK


_MEASURE_METHODS = ("exact", "bound", "seesaw", "sdp", "pptmix", "fidelity")


def cmd_measure(args) -> int:
    theta = parse_theta(args.theta)
    method = args.method
    target = args.target.upper() if args.target else None
    if method in ("exact", "bound", "seesaw", "sdp", "fidelity") and target not in ("GM", "GGM"):
        raise UsageError(f"method {method!r} needs --target GM or GGM")
    seed = args.seed
    opts = SolverOptions()
    record = {
        "method": method,
        "target": target,
        "subspace": args.subspace.upper(),
        "N": args.N,
        "d": args.d,
        "theta": theta,
        "p": args.p,
        "provenance": {"seed": seed, "restarts": args.restarts,
                       "solver_tol": opts.tol, "version": __version__},
    }
    dump_program = None

    if method == "exact":
        label = args.subspace.upper()
        if label == "S":
            if target == "GGM":
                record["value"] = exact.ggm_ges_exact(args.N, args.d, theta).value
                record["formula"] = "(1 - sqrt(1 - sin(theta)^2 sin(pi/d)^2)) / 2"
            elif args.N == 2:
                res = exact.gm_ces_exact(args.d, theta)
                record["value"] = res.value
                record["single_vector"] = res.single_vector
                record["formula"] = (
                    "min(sin(theta/2)^2, cos(theta/2)^2)" if res.single_vector
                    else "(1 - sqrt(1 - sin(theta)^2 sin(pi/d)^2)) / 2"
                )
            else:
                raise UsageError(
                    "no closed form for the GM of S with N > 2; use --method bound or seesaw"
                )
        elif label == "ASYM":
            record["value"] = float(
                exact.antisym_ggm(args.N) if target == "GGM" else exact.antisym_gm(args.N)
            )
            record["formula"] = "1 - 1/N" if target == "GGM" else "1 - 1/N!"
        else:
            raise UsageError(f"no exact formula for subspace {label!r}")
    elif method == "bound":
        if target != "GM":
            raise UsageError("--method bound provides a GM upper bound only")
        if args.subspace.upper() != "S" or abs(theta - math.pi / 2) > 1e-12:
            raise UsageError("the closed-form GM bound covers the S family at theta = pi/2")
        record["value"] = float(exact.gm_upper_bound(args.N, args.d))
        record["formula"] = (
            "1 - [(d-1+cos(pi/d))^(N-1) + ((d-1)cos(pi/d)+1)^(N-1)] / (2 d^(N-1))"
        )
    elif method == "seesaw":
        sub = _build_subspace(args.subspace, args.N, args.d, theta)
        cfg = SeesawConfig(restarts=args.restarts, rng_seed=seed)
        if target == "GM":
            res = seesaw_gm(sub, cfg)
            record["value"] = res.entanglement
            record["overlap"] = res.overlap
            record["converged"] = res.converged
            record["optimizer"] = [tensor_core.to_json_dict(f) for f in res.optimizer]
        else:
            res = ggm_via_cuts(sub, cfg)
            record["value"] = res.value
            record["achieving_cut"] = sorted(res.cut.k_set)
            best = res.per_cut[res.cut]
            record["optimizer"] = [tensor_core.to_json_dict(f) for f in best.optimizer]
    elif method == "sdp":
        sub = _build_subspace(args.subspace, args.N, args.d, theta)
        if target == "GM":
            res = gm_lower_bound(sub, opts)
            dump_program = gm_bound_program(sub)
        else:
            res = ggm_lower_bound(sub, opts)
            record["per_cut"] = {str(k): v for k, v in res.per_cut.items()}
        record["value"] = res.value
        record["solver"] = {"status": res.solution.status, "iterations": res.solution.iterations,
                            "gap": res.solution.gap}
        record["feasibility_audit_ok"] = res.audit["ok"]
    elif method == "pptmix":
        sub = _build_subspace(args.subspace, args.N, args.d, theta)
        state = _proj_state(sub, args.p)
        res = ppt_mixture_monotone(state, fully_ppt=args.fully, options=opts)
        dump_program = ppt_mixture_program(state, fully_ppt=args.fully)
        record["value"] = res.value
        record["fully_ppt"] = args.fully
        record["solver"] = {"status": res.solution.status, "iterations": res.solution.iterations,
                            "gap": res.solution.gap}
    elif method == "fidelity":
        sub = _build_subspace(args.subspace, args.N, args.d, theta)
        state = _proj_state(sub, args.p)
        if target == "GM":
            res = fidelity_gm_bound(state, opts)
            dump_program = fidelity_gm_program(state)
        else:
            res = fidelity_ggm_bound(state, opts)
            dump_program = fidelity_ggm_program(state)
        record["value"] = res.value
        record["max_fidelity"] = res.extra["max_fidelity"]
        record["solver"] = {"status": res.solution.status, "iterations": res.solution.iterations,
                            "gap": res.solution.gap}
    else:
        raise UsageError(f"unknown method {method!r}")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"measure_{method}_{target or 'NA'}_{args.subspace.upper()}_N{args.N}_d{args.d}"
    if args.dump_program:
        if dump_program is None:
            raise UsageError(f"--dump-program is not available for method {method!r}")
        with open(out_dir / f"{stem}_program.json", "w", encoding="utf-8") as fh:
            json.dump(dump_program.to_json_dict(), fh, indent=2, sort_keys=True)
    manifest = RunManifest(
        command="measure",
        parameters={k: record[k] for k in ("method", "target", "subspace", "N", "d", "theta", "p")},
        rng_seed=seed,
        solver_settings={"tol": opts.tol, "restarts": args.restarts},
    )
    manifest.add_result(record)
    manifest.write(out_dir / f"manifest_{stem}.json")
    with open(out_dir / f"{stem}.json", "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
    print(f"{method} {target or ''} {args.subspace.upper()}(N={args.N}, d={args.d}): "
          f"value = {record['value']:.8g}")
    return EXIT_OK


def cmd_noise_threshold(args) -> int:
    theta = parse_theta(args.theta)
    sub = _build_subspace(args.subspace, args.N, args.d, theta)
    target = args.target.lower()
    if target not in ("gme", "ent"):
        raise UsageError("--target must be gme or ent")
    opts = SolverOptions()
    if args.method == "witness":
        eps = subspace_epsilon(args.subspace, args.N, args.d, theta, target,
                               args.seed, args.restarts)
        result = noise.threshold_witness(sub, target, float(eps))
    elif args.method == "pptmix":
        if target != "gme":
            raise UsageError("the PPT-mixture detector certifies genuine entanglement only")
        result = noise.threshold_bisect(sub, "pptmix", tol_p=args.tol, options=opts)
    elif args.method == "fidelity":
        detector = "fidelity-GGM" if target == "gme" else "fidelity-GM"
        result = noise.threshold_bisect(sub, detector, tol_p=args.tol, options=opts)
    else:
        raise UsageError("--method must be witness, pptmix, or fidelity")

    record = {
        "subspace": args.subspace.upper(),
        "N": args.N,
        "d": args.d,
        "theta": theta,
        "method": result.method,
        "target": target,
        "p_star": result.p_star,
        "bracket": list(result.bracket),
        "detector_at_bracket": list(result.detector_at_bracket),
        "monotone": result.monotone,
        "samples": [list(s) for s in result.samples],
    }
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"threshold_{args.method}_{target}_{args.subspace.upper()}_N{args.N}_d{args.d}"
    with open(out_dir / f"{stem}.json", "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
    manifest = RunManifest(
        command="noise-threshold",
        parameters={"subspace": args.subspace.upper(), "N": args.N, "d": args.d,
                    "theta": theta, "method": args.method, "target": target, "tol": args.tol},
        rng_seed=args.seed,
        solver_settings={"tol": opts.tol},
    )
    manifest.add_result(record)
    manifest.write(out_dir / f"manifest_{stem}.json")
    print(f"{args.method} {target} threshold for {args.subspace.upper()}"
          f"(N={args.N}, d={args.d}): p* = {result.p_star:.6g}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = "fig1" if args.fig1 else args.table
    if table is None:
        raise UsageError("choose a table with --table or pass --fig1")
    budget = Budget(
        max_dim=args.max_D,
        tier_limit=2 if args.full else 1,
        restarts=args.restarts,
        seed=args.seed,
        jobs=args.jobs,
        bisect_tol=args.tol,
    )
    manifest = RunManifest(
        command="reproduce",
        parameters={"table": table, "max_D": args.max_D, "full": args.full,
                    "restarts": args.restarts, "jobs": args.jobs, "tol": args.tol},
        rng_seed=args.seed,
        solver_settings={"sdp_tol": SolverOptions().tol},
    )
    if table == "fig1":
        code = run_fig1(out_dir, manifest)
    else:
        if table not in TABLES:
            raise UsageError(f"unknown table {table!r}; choose from {TABLES} or --fig1")
        code = run_table(table, budget, out_dir, manifest, methods=args.methods)
    manifest.write(out_dir / f"manifest_reproduce_{table}.json")
    return code


def cmd_verify(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(command="verify", parameters={}, rng_seed=args.seed, solver_settings={})
    ok = True
    for d in (2, 3, 4):
        report = subspaces.verify_local_unitary_reduction(d)
        ok &= report.equivalent
        manifest.add_result({"check": f"local_unitary_reduction_d{d}",
                             "equivalent": report.equivalent,
                             "projector_distance": report.projector_distance,
                             "dim": report.dim})
        print(f"local-unitary reduction d={d}: "
              f"{'ok' if report.equivalent else 'FAIL'} (distance {report.projector_distance:.2e})")
    state, report = subspaces.ppt_gap_state()
    exact_overlap = report.overlap_with_complement
    expected = 239371, 568000
    overlap_ok = (exact_overlap.numerator, exact_overlap.denominator) == expected
    ok &= report.is_ppt_all_cuts and overlap_ok
    manifest.add_result({
        "check": "ppt_gap_state",
        "ppt_all_cuts": report.is_ppt_all_cuts,
        "min_eigenvalues": {str(k): v for k, v in report.ppt_min_eigenvalues.items()},
        "complement_overlap": [exact_overlap.numerator, exact_overlap.denominator],
        "ok": report.is_ppt_all_cuts and overlap_ok,
    })
    print(f"gap state: PPT across all cuts {'ok' if report.is_ppt_all_cuts else 'FAIL'}, "
          f"complement overlap {exact_overlap} {'ok' if overlap_ok else 'FAIL'}")
    manifest.write(out_dir / "manifest_verify.json")
    return EXIT_OK if ok else EXIT_TOLERANCE


# ---------------------------------------------------------------------------

def build_parser() -> CliParser:
    parser = CliParser(prog="gesq", description=__doc__)
    parser.add_argument("--version", action="version", version=f"gesq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--seed", type=int, default=default_seed(),
                       help="RNG seed (default: GESQ_SEED env or 0)")

    p = sub.add_parser("construct", help="build a subspace and export it as JSON")
    p.add_argument("--subspace", required=True, help="S | Q1 | Q2 | ASYM | WSPAN")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--theta", default="pi/2")
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("measure", help="compute one entanglement quantity")
    p.add_argument("--method", required=True, choices=_MEASURE_METHODS)
    p.add_argument("--target", default=None, help="GM or GGM")
    p.add_argument("--subspace", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--theta", default="pi/2")
    p.add_argument("--p", type=float, default=0.0, help="white-noise weight for state detectors")
    p.add_argument("--fully", action="store_true", help="fully-PPT witness variant of pptmix")
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--dump-program", action="store_true",
                   help="also write the conic program in sparse JSON form")
    common(p)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("noise-threshold", help="white-noise tolerance of the projector state")
    p.add_argument("--subspace", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--theta", default="pi/2")
    p.add_argument("--method", required=True, choices=("witness", "pptmix", "fidelity"))
    p.add_argument("--target", required=True, help="gme or ent")
    p.add_argument("--tol", type=float, default=2e-3, help="bisection width on p")
    p.add_argument("--restarts", type=int, default=200)
    common(p)
    p.set_defaults(func=cmd_noise_threshold)

    p = sub.add_parser("reproduce", help="recompute a bundled reference table or the figure")
    p.add_argument("--table", default=None, help="|".join(TABLES))
    p.add_argument("--fig1", action="store_true", help="emit the angle-sweep figure data")
    p.add_argument("--methods", default=None,
                   help="comma-separated method classes to compute (e.g. witness,sdp)")
    p.add_argument("--max-D", type=int, default=4096, help="skip cells above this dimension")
    p.add_argument("--full", action="store_true", help="include the slow cells")
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes for cells")
    p.add_argument("--tol", type=float, default=2e-3, help="bisection width for threshold cells")
    common(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("verify", help="run the built-in equivalence and certificate checks")
    common(p)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
