"""Carrier for semidefinite programs over Hermitian matrix variables.

A :class:`ConicProgram` holds matrix variables (Hermitian, real symmetric, or
general rectangular), PSD constraints on affine Hermitian-valued expressions
of those variables (including partial-transpose images), scalar trace
equalities, and a real linear objective.  The representation is entry-level:
every real scalar coordinate of a variable has a known sparse image inside
each constraint block, which is exactly what the dense interior-point solver
needs to assemble its Newton systems without any symbolic layer.

Real data is kept real: a variable declared with ``real=True`` is a real
symmetric (or real rectangular) block and the cones it feeds stay real
symmetric, halving the eigenproblem sizes.  Fully complex programs can in
addition be lowered to real form with :func:`embed_real`, which doubles each
complex Hermitian block M into [[Re M, -Im M], [Im M, Re M]]; the optimum is
unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

_SQ2 = math.sqrt(2.0)


@dataclass(frozen=True)
class MatrixVar:
    """One matrix variable: a contiguous block of real scalar coordinates."""

    name: str
    kind: str          # "herm" | "sym" | "cgen" | "rgen"
    rows: int
    cols: int
    offset: int
    size: int

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols


def _herm_basis_entries(d: int):
    """Coordinate -> entry list for the orthonormal Hermitian basis of size d.

    Ordering: d diagonal elements, then the symmetric and antisymmetric
    off-diagonal pairs interleaved by (i, j) with i < j.
    """
    entries = []
    for i in range(d):
        entries.append([(i, i, 1.0 + 0j)])
    for i in range(d):
        for j in range(i + 1, d):
            entries.append([(i, j, 1 / _SQ2 + 0j), (j, i, 1 / _SQ2 + 0j)])
            entries.append([(i, j, 1j / _SQ2), (j, i, -1j / _SQ2)])
    return entries


def _sym_basis_entries(d: int):
    entries = []
    for i in range(d):
        entries.append([(i, i, 1.0 + 0j)])
    for i in range(d):
        for j in range(i + 1, d):
            entries.append([(i, j, 1 / _SQ2 + 0j), (j, i, 1 / _SQ2 + 0j)])
    return entries


def _var_basis_entries(var: MatrixVar):
    """Per-coordinate entry lists of the bare variable matrix."""
    if var.kind == "herm":
        return _herm_basis_entries(var.rows)
    if var.kind == "sym":
        return _sym_basis_entries(var.rows)
    if var.kind == "rgen":
        return [[(i, j, 1.0 + 0j)] for i in range(var.rows) for j in range(var.cols)]
    if var.kind == "cgen":
        out = [[(i, j, 1.0 + 0j)] for i in range(var.rows) for j in range(var.cols)]
        out += [[(i, j, 1j)] for i in range(var.rows) for j in range(var.cols)]
        return out
    raise ValueError(f"unknown variable kind {var.kind}")


def reconstruct_matrix(var: MatrixVar, x: np.ndarray) -> np.ndarray:
    """Variable coordinates back to a dense matrix."""
    coords = x[var.offset : var.offset + var.size]
    mat = np.zeros((var.rows, var.cols), dtype=np.complex128)
    for c, entry in zip(coords, _var_basis_entries(var)):
        for (i, j, v) in entry:
            mat[i, j] += c * v
    if var.kind in ("sym", "rgen"):
        return mat.real
    return mat


def matrix_inner_coords(var: MatrixVar, cmat: np.ndarray) -> np.ndarray:
    """Coordinates of the linear functional X -> Re tr(C X) on a variable.

    For Hermitian/symmetric variables ``C`` must be Hermitian and the
    functional is the Frobenius inner product; for rectangular variables
    ``C`` has shape (cols, rows) so that ``tr(X C)`` is defined.
    """
    cmat = np.asarray(cmat, dtype=np.complex128)
    out = np.zeros(var.size)
    if var.kind in ("herm", "sym"):
        d = var.rows
        if cmat.shape != (d, d):
            raise ValueError("coefficient matrix shape mismatch")
        k = 0
        for i in range(d):
            out[k] = cmat[i, i].real
            k += 1
        for i in range(d):
            for j in range(i + 1, d):
                out[k] = _SQ2 * cmat[i, j].real
                k += 1
                if var.kind == "herm":
                    out[k] = _SQ2 * cmat[i, j].imag
                    k += 1
        return out
    if cmat.shape != (var.cols, var.rows):
        raise ValueError("coefficient matrix shape mismatch")
    k = 0
    for i in range(var.rows):
        for j in range(var.cols):
            out[k] = cmat[j, i].real
            k += 1
    if var.kind == "cgen":
        for i in range(var.rows):
            for j in range(var.cols):
                out[k] = -cmat[j, i].imag
                k += 1
    return out


def _digits(dims: Sequence[int], flat: int) -> list[int]:
    out = []
    for d in reversed(dims):
        out.append(flat % d)
        flat //= d
    out.reverse()
    return out


def _pt_entry(dims: Sequence[int], parties: Sequence[int], i: int, j: int) -> tuple[int, int]:
    """Entry relocation (i, j) -> (i', j') under a partial transpose."""
    di = _digits(dims, i)
    dj = _digits(dims, j)
    for p in parties:
        di[p], dj[p] = dj[p], di[p]
    fi = fj = 0
    for a, b, d in zip(di, dj, dims):
        fi = fi * d + a
        fj = fj * d + b
    return fi, fj


class HermExpr:
    """Affine Hermitian-valued expression: constant plus variable terms.

    Terms place (optionally partial-transposed, scaled) variable matrices at
    a block offset; rectangular variables are placed together with their
    adjoint at the mirrored offset so the expression stays Hermitian.
    """

    def __init__(self, out_dim: int):
        self.out_dim = out_dim
        self.const = np.zeros((out_dim, out_dim), dtype=np.complex128)
        self._terms: list[tuple[MatrixVar, float, tuple | None, tuple[int, int]]] = []

    def add_const(self, mat: np.ndarray) -> "HermExpr":
        mat = np.asarray(mat, dtype=np.complex128)
        if mat.shape != (self.out_dim, self.out_dim):
            raise ValueError("constant block shape mismatch")
        self.const = self.const + mat
        return self

    def add_var(
        self,
        var: MatrixVar,
        coeff: float = 1.0,
        pt: tuple[Sequence[int], Sequence[int]] | None = None,
        at: tuple[int, int] = (0, 0),
    ) -> "HermExpr":
        """Add ``coeff * op(X_var)`` at block offset ``at``.

        ``pt`` is ``(dims, parties)`` requesting a partial transpose (square
        variables only).  Square variables must sit on the diagonal; a
        rectangular variable at off-diagonal ``(r, c)`` also contributes its
        adjoint at ``(c, r)``.
        """
        r0, c0 = at
        if var.is_square and var.kind in ("herm", "sym"):
            if r0 != c0:
                raise ValueError("Hermitian variables must sit on a diagonal block")
            if r0 + var.rows > self.out_dim:
                raise ValueError("block exceeds expression size")
        else:
            if pt is not None:
                raise ValueError("partial transpose applies to square Hermitian variables")
            if r0 + var.rows > self.out_dim or c0 + var.cols > self.out_dim:
                raise ValueError("block exceeds expression size")
        if pt is not None:
            dims, parties = pt
            if math.prod(dims) != var.rows:
                raise ValueError("partial-transpose dims do not match the variable")
        self._terms.append((var, float(coeff), pt, (r0, c0)))
        return self

    def entry_table(self, n_total: int):
        """COO-style arrays (col, row, colidx, val) of every coordinate image."""
        cols, ri, cj, vals = [], [], [], []
        for var, coeff, pt, (r0, c0) in self._terms:
            basis = _var_basis_entries(var)
            for local, entry in enumerate(basis):
                gcol = var.offset + local
                for (i, j, v) in entry:
                    if pt is not None:
                        dims, parties = pt
                        i, j = _pt_entry(dims, parties, i, j)
                    cols.append(gcol)
                    ri.append(r0 + i)
                    cj.append(c0 + j)
                    vals.append(coeff * v)
                    if not (var.is_square and var.kind in ("herm", "sym")):
                        # mirrored adjoint entry keeps the expression Hermitian
                        cols.append(gcol)
                        ri.append(c0 + j)
                        cj.append(r0 + i)
                        vals.append(coeff * np.conj(v))
        return (
            np.asarray(cols, dtype=np.int64),
            np.asarray(ri, dtype=np.int64),
            np.asarray(cj, dtype=np.int64),
            np.asarray(vals, dtype=np.complex128),
        )


@dataclass
class Cone:
    """One PSD constraint block in entry form."""

    dim: int
    field: str                     # "r" | "c"
    col: np.ndarray                # (K,) global coordinate index per entry
    row_i: np.ndarray              # (K,)
    col_j: np.ndarray              # (K,)
    val: np.ndarray                # (K,) complex
    const: np.ndarray              # (dim, dim)
    name: str = ""

    # padded per-column view, built lazily by the solver
    active: np.ndarray | None = None
    pad_p: np.ndarray | None = None
    pad_q: np.ndarray | None = None
    pad_v: np.ndarray | None = None

    def materialize(self, x: np.ndarray) -> np.ndarray:
        dtype = np.float64 if self.field == "r" else np.complex128
        out = np.array(self.const, dtype=dtype, copy=True)
        contrib = self.val * x[self.col]
        if self.field == "r":
            contrib = contrib.real
        np.add.at(out, (self.row_i, self.col_j), contrib)
        return out

    def adjoint_dot(self, y_mat: np.ndarray, n_total: int) -> np.ndarray:
        """Apply the transposed coefficient map to a Hermitian matrix."""
        out = np.zeros(n_total)
        vals = (np.conj(self.val) * y_mat[self.row_i, self.col_j]).real
        np.add.at(out, self.col, vals)
        return out

    def build_padding(self):
        """Reduce each coordinate image to padded conjugate-pair representatives.

        Every coordinate image is Hermitian, so its entries come in pairs
        (i, j, v), (j, i, conj v); only the upper-triangle representative is
        kept (diagonal entries with half weight), which halves the work in
        the solver's Schur assembly.
        """
        if self.active is not None:
            return
        # merge duplicate (col, i, j) entries first
        m = self.dim
        key = (self.col * m + self.row_i) * m + self.col_j
        uniq, inv = np.unique(key, return_inverse=True)
        vals = np.zeros(uniq.size, dtype=np.complex128)
        np.add.at(vals, inv, self.val)
        cj = uniq % m
        ri = (uniq // m) % m
        col = uniq // (m * m)

        upper = ri < cj
        diag = ri == cj
        lower = ri > cj
        # Hermiticity audit: every lower entry mirrors an upper one
        mirror_key = (col[lower] * m + cj[lower]) * m + ri[lower]
        upper_lookup = dict(zip(((col[upper] * m + ri[upper]) * m + cj[upper]).tolist(),
                                vals[upper].tolist()))
        for mk, lv in zip(mirror_key.tolist(), vals[lower].tolist()):
            uv = upper_lookup.get(mk)
            if uv is None or abs(np.conj(uv) - lv) > 1e-10 * max(1.0, abs(lv)):
                raise ValueError("cone expression column image is not Hermitian")

        keep = upper | diag
        rep_col = col[keep]
        rep_i = ri[keep]
        rep_j = cj[keep]
        rep_v = vals[keep].copy()
        rep_v[diag[keep]] *= 0.5

        order = np.argsort(rep_col, kind="stable")
        rep_col = rep_col[order]
        rep_i = rep_i[order]
        rep_j = rep_j[order]
        rep_v = rep_v[order]
        active, starts, counts = np.unique(rep_col, return_index=True, return_counts=True)
        width = int(counts.max()) if counts.size else 1
        k = active.size
        pad_p = np.zeros((k, width), dtype=np.int64)
        pad_q = np.zeros((k, width), dtype=np.int64)
        pad_v = np.zeros((k, width), dtype=np.complex128)
        for slot in range(width):
            mask = counts > slot
            idx = starts[mask] + slot
            pad_p[mask, slot] = rep_i[idx]
            pad_q[mask, slot] = rep_j[idx]
            pad_v[mask, slot] = rep_v[idx]
        self.active = active
        self.pad_p = pad_p
        self.pad_q = pad_q
        self.pad_v = pad_v


class ConicProgram:
    """min c.x subject to PSD constraints on affine expressions and A x = b."""

    def __init__(self):
        self.variables: dict[str, MatrixVar] = {}
        self.cones: list[Cone] = []
        self._eq_rows: list[np.ndarray] = []
        self._eq_rhs: list[float] = []
        self.c: np.ndarray | None = None
        self.obj_const: float = 0.0
        self._n = 0

    # -- variables ---------------------------------------------------------

    def add_matrix_var(self, name: str, rows: int, cols: int | None = None, *,
                       hermitian: bool = True, real: bool = False) -> MatrixVar:
        if name in self.variables:
            raise ValueError(f"duplicate variable {name!r}")
        cols = rows if cols is None else cols
        if hermitian:
            if rows != cols:
                raise ValueError("Hermitian variables must be square")
            kind = "sym" if real else "herm"
            size = rows * (rows + 1) // 2 if real else rows * rows
        else:
            kind = "rgen" if real else "cgen"
            size = rows * cols * (1 if real else 2)
        var = MatrixVar(name, kind, rows, cols, self._n, size)
        self.variables[name] = var
        self._n += size
        return var

    @property
    def n_total(self) -> int:
        return self._n

    # -- constraints and objective ------------------------------------------

    def add_psd(self, expr: HermExpr, name: str = "") -> None:
        col, ri, cj, val = expr.entry_table(self._n)
        herm_resid = float(np.abs(expr.const - expr.const.conj().T).max(initial=0.0))
        if herm_resid > 1e-12:
            raise ValueError("constant block is not Hermitian")
        is_real = bool(
            np.abs(val.imag).max(initial=0.0) < 1e-15
            and np.abs(expr.const.imag).max(initial=0.0) < 1e-15
        )
        self.cones.append(
            Cone(
                dim=expr.out_dim,
                field="r" if is_real else "c",
                col=col,
                row_i=ri,
                col_j=cj,
                val=val,
                const=expr.const.real.copy() if is_real else expr.const.copy(),
                name=name,
            )
        )

    def add_trace_equality(self, terms: Iterable[tuple[MatrixVar, float]], rhs: float) -> None:
        row = np.zeros(self._n)
        for var, coeff in terms:
            if var.kind not in ("herm", "sym"):
                raise ValueError("trace equality needs square Hermitian variables")
            row[var.offset : var.offset + var.size] += coeff * matrix_inner_coords(
                var, np.eye(var.rows)
            )
        self._eq_rows.append(row)
        self._eq_rhs.append(float(rhs))

    def set_objective(self, terms: Iterable[tuple[MatrixVar, np.ndarray]], constant: float = 0.0) -> None:
        c = np.zeros(self._n)
        for var, cmat in terms:
            c[var.offset : var.offset + var.size] += matrix_inner_coords(var, cmat)
        self.c = c
        self.obj_const = float(constant)

    @property
    def eq_matrix(self) -> np.ndarray:
        if not self._eq_rows:
            return np.zeros((0, self._n))
        return np.stack(self._eq_rows, axis=0)

    @property
    def eq_rhs(self) -> np.ndarray:
        return np.asarray(self._eq_rhs, dtype=float)

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        """Sparse description of the program for external cross-checking.

        Coordinates refer to the flat real parameter vector; each cone lists
        (coordinate, row, col, re, im) entry quintuples and its constant
        block in the same triplet style.
        """
        cones = []
        for cone in self.cones:
            nz = np.argwhere(np.abs(cone.const) > 0)
            cones.append(
                {
                    "name": cone.name,
                    "dim": cone.dim,
                    "field": cone.field,
                    "entries": [
                        [int(c), int(i), int(j), float(v.real), float(v.imag)]
                        for c, i, j, v in zip(cone.col, cone.row_i, cone.col_j, cone.val)
                    ],
                    "constant": [
                        [int(i), int(j), float(np.real(cone.const[i, j])), float(np.imag(cone.const[i, j]))]
                        for i, j in nz
                    ],
                }
            )
        a = self.eq_matrix
        eq_entries = [
            [int(r), int(cc), float(a[r, cc])]
            for r in range(a.shape[0])
            for cc in np.flatnonzero(np.abs(a[r]) > 0)
        ]
        return {
            "schema": "gesq-conic-1",
            "n_coordinates": self._n,
            "variables": [
                {
                    "name": v.name,
                    "kind": v.kind,
                    "rows": v.rows,
                    "cols": v.cols,
                    "offset": v.offset,
                    "size": v.size,
                }
                for v in self.variables.values()
            ],
            "objective": {
                "coefficients": [
                    [int(i), float(ci)] for i, ci in enumerate(self.c) if ci != 0.0
                ],
                "constant": self.obj_const,
            },
            "equalities": {"entries": eq_entries, "rhs": [float(b) for b in self.eq_rhs]},
            "cones": cones,
        }


def embed_real(program: ConicProgram) -> ConicProgram:
    """Rewrite every complex Hermitian cone as its doubled real embedding.

    The coordinates, objective, and equalities are untouched; each complex
    block M becomes [[Re M, -Im M], [Im M, Re M]], which is PSD exactly when
    M is, so the optimum is preserved while only real symmetric cones remain.
    """
    out = ConicProgram()
    out.variables = dict(program.variables)
    out._n = program.n_total
    out._eq_rows = [row.copy() for row in program._eq_rows]
    out._eq_rhs = list(program._eq_rhs)
    out.c = None if program.c is None else program.c.copy()
    out.obj_const = program.obj_const
    for cone in program.cones:
        if cone.field == "r":
            out.cones.append(
                Cone(
                    dim=cone.dim,
                    field="r",
                    col=cone.col.copy(),
                    row_i=cone.row_i.copy(),
                    col_j=cone.col_j.copy(),
                    val=cone.val.copy(),
                    const=cone.const.copy(),
                    name=cone.name,
                )
            )
            continue
        m = cone.dim
        cols, ri, cj, vals = [], [], [], []
        for c, i, j, v in zip(cone.col, cone.row_i, cone.col_j, cone.val):
            if v.real != 0.0:
                cols += [c, c]
                ri += [i, i + m]
                cj += [j, j + m]
                vals += [v.real, v.real]
            if v.imag != 0.0:
                cols += [c, c]
                ri += [i, i + m]
                cj += [j + m, j]
                vals += [-v.imag, v.imag]
        const = np.zeros((2 * m, 2 * m))
        const[:m, :m] = cone.const.real
        const[m:, m:] = cone.const.real
        const[:m, m:] = -cone.const.imag
        const[m:, :m] = cone.const.imag
        out.cones.append(
            Cone(
                dim=2 * m,
                field="r",
                col=np.asarray(cols, dtype=np.int64),
                row_i=np.asarray(ri, dtype=np.int64),
                col_j=np.asarray(cj, dtype=np.int64),
                val=np.asarray(vals, dtype=np.complex128),
                const=const,
                name=cone.name + "/embedded",
            )
        )
    return out
