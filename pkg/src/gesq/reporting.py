"""Delimited output, reference diffs, figures, and run manifests for the CLI.

Every table reproduction writes four artifacts next to each other: the
computed CSV, a copy of the bundled reference CSV, a per-cell diff report,
and a rendered PNG figure summarising the comparison.  CSVs are RFC-4180
with '.' decimal separators; JSON is pretty-printed with sorted keys.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import __version__

CSV_FIELDS = ["table", "subspace", "n", "d", "quantity", "value", "tolerance", "source", "gate", "note"]


@dataclass(frozen=True)
class Cell:
    table: str
    subspace: str
    n: int
    d: int
    quantity: str
    value: float | None
    tolerance: float = 0.0
    source: str = "computed"
    gate: str = "gated"           # "gated" | "info" | "skipped"
    note: str = ""

    def key(self):
        return (self.table, self.subspace, self.n, self.d, self.quantity)


def load_reference(table: str) -> list[Cell]:
    """Bundled reference cells for one table id."""
    name = f"table_{table}.csv"
    ref = resources.files("gesq.refdata").joinpath(name)
    cells = []
    with ref.open("r", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            cells.append(
                Cell(
                    table=row["table"],
                    subspace=row["subspace"],
                    n=int(row["n"]),
                    d=int(row["d"]),
                    quantity=row["quantity"],
                    value=float(row["value"]) if row["value"] else None,
                    tolerance=float(row["tolerance"]) if row["tolerance"] else 0.0,
                    source=row["source"],
                    gate=row["gate"],
                    note=row.get("note", ""),
                )
            )
    return cells


def write_cells(path: Path, cells: list[Cell]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for cell in sorted(cells, key=lambda c: c.key()):
            writer.writerow(
                {
                    "table": cell.table,
                    "subspace": cell.subspace,
                    "n": cell.n,
                    "d": cell.d,
                    "quantity": cell.quantity,
                    "value": "" if cell.value is None else repr(float(cell.value)),
                    "tolerance": repr(float(cell.tolerance)),
                    "source": cell.source,
                    "gate": cell.gate,
                    "note": cell.note,
                }
            )


@dataclass
class DiffEntry:
    key: tuple
    reference: float
    computed: float | None
    tolerance: float
    gate: str
    delta: float | None
    ok: bool


def diff_cells(reference: list[Cell], computed: list[Cell]) -> list[DiffEntry]:
    """Per-cell absolute differences against the reference values.

    Reference values are never overwritten: computed cells are matched by
    key, and a missing computed cell shows up as a skip.
    """
    comp = {c.key(): c for c in computed}
    out = []
    for ref in reference:
        got = comp.get(ref.key())
        if got is None or got.value is None or got.gate == "skipped":
            out.append(DiffEntry(ref.key(), ref.value, None, ref.tolerance, "skipped", None, True))
            continue
        delta = abs(got.value - ref.value)
        ok = ref.gate != "gated" or delta <= ref.tolerance
        out.append(DiffEntry(ref.key(), ref.value, got.value, ref.tolerance, ref.gate, delta, ok))
    return out


def write_diff(path: Path, diffs: list[DiffEntry]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["table", "subspace", "n", "d", "quantity", "reference", "computed", "abs_delta", "tolerance", "gate", "ok"]
        )
        for e in diffs:
            writer.writerow(
                list(e.key)
                + [
                    repr(e.reference),
                    "" if e.computed is None else repr(e.computed),
                    "" if e.delta is None else repr(e.delta),
                    repr(e.tolerance),
                    e.gate,
                    "ok" if e.ok else "FAIL",
                ]
            )


def render_table_figure(path: Path, table: str, diffs: list[DiffEntry]) -> None:
    """Bar chart of per-cell deviations against their tolerance classes."""
    rows = [e for e in diffs if e.delta is not None]
    fig, ax = plt.subplots(figsize=(8, max(2.0, 0.32 * len(rows) + 1.2)))
    if rows:
        labels = ["{0}/{4} N={2} d={3}".format(*e.key) for e in rows]
        deltas = [max(e.delta, 1e-12) for e in rows]
        tols = [max(e.tolerance, 1e-12) for e in rows]
        y = range(len(rows))
        colors = ["tab:blue" if e.ok else "tab:red" for e in rows]
        ax.barh(list(y), deltas, color=colors, alpha=0.8, label="|computed - reference|")
        ax.plot(tols, list(y), "k|", markersize=10, label="tolerance")
        ax.set_yticks(list(y))
        ax.set_yticklabels(labels, fontsize=7)
        ax.set_xscale("log")
        ax.set_xlabel("absolute deviation")
        ax.legend(loc="lower right", fontsize=7)
    ax.set_title(f"table {table}: computed vs reference")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_curve_figure(path: Path, rows: list[tuple[float, int, float]]) -> None:
    """Entanglement-versus-angle curves, one per local dimension."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    dims = sorted({d for _, d, _ in rows})
    for d in dims:
        pts = [(t, v) for (t, dd, v) in rows if dd == d]
        pts.sort()
        ax.plot([t for t, _ in pts], [v for _, v in pts], label=f"d={d}")
    ax.set_xlabel("theta")
    ax.set_ylabel("subspace entanglement (GM)")
    ax.legend(fontsize=8)
    ax.set_title("two-party family: entanglement versus mixing angle")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


@dataclass
class RunManifest:
    """Reproducibility record of one CLI invocation."""

    command: str
    parameters: dict
    rng_seed: int
    solver_settings: dict
    results: list = field(default_factory=list)
    artifact_version: str = __version__
    wall_clock_seconds: float = 0.0
    started_unix: float = field(default_factory=time.time)

    def add_result(self, record: dict) -> None:
        self.results.append(record)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "rng_seed": self.rng_seed,
            "solver_settings": self.solver_settings,
            "results": self.results,
            "artifact_version": self.artifact_version,
            "wall_clock_seconds": self.wall_clock_seconds,
            "started_unix": self.started_unix,
        }

    def write(self, path: Path) -> None:
        self.wall_clock_seconds = time.time() - self.started_unix
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def manifest_equal_modulo_timestamps(a: dict, b: dict) -> bool:
    drop = ("wall_clock_seconds", "started_unix")
    a = {k: v for k, v in a.items() if k not in drop}
    b = {k: v for k, v in b.items() if k not in drop}
    return a == b
