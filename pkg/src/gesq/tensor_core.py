"""Dense complex linear algebra over multipartite Hilbert spaces.

Everything in this module is a pure function on immutable values: states and
operators carry their :class:`HilbertSpace`, and all index arithmetic is
row-major with party 1 slowest, so ``|i>|k>`` over dims ``(d1, d2)`` is the
flat basis vector ``i*d2 + k``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

JSON_SCHEMA = "gesq-1"

HERM_ATOL = 1e-12
PROJ_ATOL = 1e-10
RANK_RTOL = 1e-9


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered local dimensions of the N parties."""

    dims: tuple[int, ...]

    def __init__(self, dims: Iterable[int]):
        dims = tuple(int(d) for d in dims)
        if len(dims) < 1 or any(d < 1 for d in dims):
            raise ValueError(f"local dimensions must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def multi_index(self, flat: int) -> tuple[int, ...]:
        """Digits of a flat index, party 1 slowest."""
        if not 0 <= flat < self.dim:
            raise ValueError(f"index {flat} out of range for dim {self.dim}")
        out = []
        for d in reversed(self.dims):
            out.append(flat % d)
            flat //= d
        return tuple(reversed(out))

    def flat_index(self, multi: Sequence[int]) -> int:
        if len(multi) != self.n_parties:
            raise ValueError("multi-index length does not match party count")
        flat = 0
        for i, d in zip(multi, self.dims):
            if not 0 <= i < d:
                raise ValueError(f"digit {i} out of range for local dim {d}")
            flat = flat * d + i
        return flat

    def check_parties(self, parties: Iterable[int]) -> tuple[int, ...]:
        parties = tuple(sorted(set(int(p) for p in parties)))
        if any(p < 0 or p >= self.n_parties for p in parties):
            raise ValueError(f"party indices {parties} out of range for N={self.n_parties}")
        return parties

    def subspace_dims(self, parties: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.dims[p] for p in parties)


@dataclass(frozen=True)
class Bipartition:
    """A cut K | complement(K); stored canonically with party 0 in K.

    ``K`` and its complement name the same cut, so the constructor replaces
    ``K`` by the complement whenever party 0 is missing.  For ``N`` parties
    there are exactly ``2**(N-1) - 1`` distinct canonical cuts.
    """

    k_set: frozenset[int]
    n_parties: int

    def __init__(self, parties: Iterable[int], n_parties: int):
        parties = frozenset(int(p) for p in parties)
        n_parties = int(n_parties)
        if any(p < 0 or p >= n_parties for p in parties):
            raise ValueError("party index out of range")
        if not parties or len(parties) == n_parties:
            raise ValueError("a bipartition must be a nonempty proper subset of the parties")
        if 0 not in parties:
            parties = frozenset(range(n_parties)) - parties
        object.__setattr__(self, "k_set", parties)
        object.__setattr__(self, "n_parties", n_parties)

    @property
    def complement(self) -> tuple[int, ...]:
        return tuple(p for p in range(self.n_parties) if p not in self.k_set)

    @property
    def parties(self) -> tuple[int, ...]:
        return tuple(sorted(self.k_set))

    def __str__(self) -> str:
        k = ",".join(str(p) for p in self.parties)
        return f"{{{k}}}"


def all_bipartitions(n_parties: int) -> list[Bipartition]:
    """All canonical bipartitions of ``n_parties`` parties."""
    if n_parties < 2:
        return []
    cuts = []
    others = range(1, n_parties)
    for r in range(n_parties - 1):
        for rest in combinations(others, r):
            cuts.append(Bipartition({0, *rest}, n_parties))
    return cuts


@dataclass(frozen=True)
class PureState:
    """A ket: complex amplitude vector over a multipartite space."""

    amplitudes: np.ndarray
    space: HilbertSpace

    def __init__(self, amplitudes: np.ndarray, space: HilbertSpace):
        amp = np.asarray(amplitudes, dtype=np.complex128).reshape(-1).copy()
        if amp.shape[0] != space.dim:
            raise ValueError(f"amplitude length {amp.shape[0]} != space dim {space.dim}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "space", space)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "PureState":
        n = self.norm
        if n < 1e-14:
            raise ValueError("cannot normalize a zero vector")
        return PureState(self.amplitudes / n, self.space)

    def overlap(self, other: "PureState") -> complex:
        """<self|other>."""
        if self.space != other.space:
            raise ValueError("states live on different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> "HermitianOp":
        v = self.amplitudes
        return HermitianOp(np.outer(v, v.conj()), self.space)


def basis_state(space: HilbertSpace, index: int | Sequence[int]) -> PureState:
    """Computational basis ket, by flat index or per-party digits."""
    flat = space.flat_index(index) if not isinstance(index, (int, np.integer)) else int(index)
    amp = np.zeros(space.dim, dtype=np.complex128)
    amp[flat] = 1.0
    return PureState(amp, space)


def random_state(space: HilbertSpace, rng: np.random.Generator) -> PureState:
    z = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    return PureState(z / np.linalg.norm(z), space)


@dataclass(frozen=True)
class HermitianOp:
    """A Hermitian matrix over a multipartite space.

    Construction symmetrizes ``(H + H^dag)/2`` and rejects inputs whose
    anti-Hermitian part exceeds ``HERM_ATOL`` relative to the matrix scale;
    this guards every operator that later enters an eigensolver or SDP.
    """

    entries: np.ndarray
    space: HilbertSpace

    def __init__(self, entries: np.ndarray, space: HilbertSpace):
        m = np.asarray(entries, dtype=np.complex128)
        if m.shape != (space.dim, space.dim):
            raise ValueError(f"matrix shape {m.shape} != ({space.dim}, {space.dim})")
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        resid = float(np.abs(m - m.conj().T).max(initial=0.0))
        if resid > HERM_ATOL * scale * 10:
            raise ValueError(f"matrix is not Hermitian (residual {resid:.2e})")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "space", space)

    @property
    def is_real(self) -> bool:
        return bool(np.abs(self.entries.imag).max(initial=0.0) < 1e-13)

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def expectation(self, state: PureState) -> float:
        v = state.amplitudes
        return float(np.real(np.vdot(v, self.entries @ v)))

    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def __add__(self, other: "HermitianOp") -> "HermitianOp":
        if self.space != other.space:
            raise ValueError("operators live on different spaces")
        return HermitianOp(self.entries + other.entries, self.space)

    def __sub__(self, other: "HermitianOp") -> "HermitianOp":
        if self.space != other.space:
            raise ValueError("operators live on different spaces")
        return HermitianOp(self.entries - other.entries, self.space)

    def __mul__(self, scalar: float) -> "HermitianOp":
        return HermitianOp(self.entries * float(scalar), self.space)

    __rmul__ = __mul__


def identity_op(space: HilbertSpace) -> HermitianOp:
    return HermitianOp(np.eye(space.dim), space)


@dataclass(frozen=True)
class Subspace:
    """A subspace given by an orthonormal basis matrix and its projector."""

    basis: np.ndarray          # D x m, orthonormal columns
    space: HilbertSpace
    label: str = ""
    raw_vectors: np.ndarray | None = None   # unnormalized generating vectors, if meaningful

    def __init__(
        self,
        basis: np.ndarray,
        space: HilbertSpace,
        label: str = "",
        raw_vectors: np.ndarray | None = None,
    ):
        b = np.asarray(basis, dtype=np.complex128)
        if b.ndim != 2 or b.shape[0] != space.dim:
            raise ValueError(f"basis shape {b.shape} incompatible with dim {space.dim}")
        gram = b.conj().T @ b
        if float(np.abs(gram - np.eye(b.shape[1])).max(initial=0.0)) > PROJ_ATOL:
            raise ValueError("basis columns are not orthonormal")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "label", label)
        if raw_vectors is not None:
            raw_vectors = np.asarray(raw_vectors, dtype=np.complex128).copy()
            raw_vectors.setflags(write=False)
        object.__setattr__(self, "raw_vectors", raw_vectors)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> HermitianOp:
        return HermitianOp(self.basis @ self.basis.conj().T, self.space)

    @property
    def complement_projector(self) -> HermitianOp:
        p = self.basis @ self.basis.conj().T
        return HermitianOp(np.eye(self.space.dim) - p, self.space)

    def contains(self, state: PureState, atol: float = 1e-9) -> bool:
        v = state.amplitudes
        resid = v - self.basis @ (self.basis.conj().T @ v)
        return bool(np.linalg.norm(resid) <= atol * max(1.0, np.linalg.norm(v)))

    def vector(self, coeffs: Sequence[complex]) -> PureState:
        c = np.asarray(coeffs, dtype=np.complex128)
        if c.shape != (self.dim,):
            raise ValueError("coefficient length does not match subspace dimension")
        return PureState(self.basis @ c, self.space)


def kron(a, b):
    """Tensor product of two states or two operators; spaces concatenate."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(
            np.kron(a.amplitudes, b.amplitudes),
            HilbertSpace(a.space.dims + b.space.dims),
        )
    if isinstance(a, HermitianOp) and isinstance(b, HermitianOp):
        return HermitianOp(
            np.kron(a.entries, b.entries),
            HilbertSpace(a.space.dims + b.space.dims),
        )
    raise TypeError("kron expects two PureState or two HermitianOp arguments")


def product_state(factors: Sequence[PureState]) -> PureState:
    out = factors[0]
    for f in factors[1:]:
        out = kron(out, f)
    return out


def projector_from_span(
    vectors: Sequence[PureState] | Sequence[np.ndarray] | np.ndarray,
    space: HilbertSpace | None = None,
    tol: float = RANK_RTOL,
    label: str = "",
) -> Subspace:
    """Orthonormalize a spanning set into a :class:`Subspace`.

    The basis is extracted by a rank-revealing SVD sweep: singular values
    below ``tol`` times the largest one are treated as zero, so exactly
    dependent inputs collapse and the detected numerical rank becomes the
    subspace dimension.  Zero vectors are rejected.
    """
    cols = []
    for v in vectors:
        if isinstance(v, PureState):
            if space is None:
                space = v.space
            elif v.space != space:
                raise ValueError("spanning vectors live on different spaces")
            cols.append(v.amplitudes)
        else:
            cols.append(np.asarray(v, dtype=np.complex128).reshape(-1))
    if not cols:
        raise ValueError("need at least one spanning vector")
    if space is None:
        raise ValueError("space must be given when passing raw arrays")
    mat = np.stack(cols, axis=1)
    if mat.shape[0] != space.dim:
        raise ValueError("vector length does not match space dimension")
    norms = np.linalg.norm(mat, axis=0)
    if np.any(norms < 1e-14):
        raise ValueError("zero vector in spanning set")
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > tol * s[0]))
    return Subspace(u[:, :rank], space, label=label, raw_vectors=mat.T)


def full_space_subspace(space: HilbertSpace, label: str = "FULL") -> Subspace:
    return Subspace(np.eye(space.dim), space, label=label)


def partial_transpose(rho: HermitianOp, cut: Bipartition | Iterable[int]) -> HermitianOp:
    """Transpose the indices of the parties in ``cut``; an involution."""
    space = rho.space
    parties = cut.parties if isinstance(cut, Bipartition) else space.check_parties(cut)
    n = space.n_parties
    if isinstance(cut, Bipartition) and cut.n_parties != n:
        raise ValueError("bipartition party count does not match operator space")
    t = rho.entries.reshape(space.dims + space.dims)
    perm = list(range(2 * n))
    for p in parties:
        perm[p], perm[n + p] = perm[n + p], perm[p]
    out = t.transpose(perm).reshape(space.dim, space.dim)
    return HermitianOp(out, space)


def project_onto_subsystem(
    op: HermitianOp,
    keep: Bipartition | Iterable[int],
    x: PureState,
) -> HermitianOp:
    """Contract ``op`` with ``x`` on both sides over the complement of ``keep``.

    Returns the dim(K) x dim(K) matrix ``<x| op |x>`` acting on the kept
    parties K, the bra/ket contraction running over the remaining parties in
    ascending order.  PSD inputs stay PSD and the trace can only shrink when
    ``x`` is normalized.
    """
    space = op.space
    keep_p = keep.parties if isinstance(keep, Bipartition) else space.check_parties(keep)
    if not keep_p or len(keep_p) == space.n_parties:
        raise ValueError("keep set must be a nonempty proper subset of the parties")
    other = tuple(p for p in range(space.n_parties) if p not in keep_p)
    other_dims = space.subspace_dims(other)
    if x.space.dims != other_dims:
        raise ValueError(
            f"contraction vector has dims {x.space.dims}, expected {other_dims}"
        )
    n = space.n_parties
    t = op.entries.reshape(space.dims + space.dims)
    xt = x.amplitudes.reshape(other_dims)
    # ket side: contract axes n+p for p in other
    t = np.tensordot(t, xt, axes=([n + p for p in other], list(range(len(other)))))
    # bra side: the original bra axes keep their positions
    t = np.tensordot(xt.conj(), t, axes=(list(range(len(other))), [p for p in other]))
    # remaining axes: bra keep (ascending), ket keep (ascending)
    dk = math.prod(space.subspace_dims(keep_p))
    mat = t.reshape(dk, dk)
    return HermitianOp(mat, HilbertSpace(space.subspace_dims(keep_p)))


def fix_phase(v: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Rotate the global phase so the first significantly nonzero entry is real positive."""
    idx = np.flatnonzero(np.abs(v) > atol)
    if idx.size == 0:
        return v
    phase = v[idx[0]] / abs(v[idx[0]])
    return v / phase


def top_eigenpair(h: HermitianOp | np.ndarray) -> tuple[float, PureState | np.ndarray]:
    """Largest eigenvalue and a deterministically chosen unit eigenvector.

    Within a degenerate top eigenspace the returned vector is the candidate
    whose absolute-value component sequence is lexicographically largest,
    phase-fixed so its first nonzero entry is real positive.
    """
    mat = h.entries if isinstance(h, HermitianOp) else np.asarray(h)
    vals, vecs = np.linalg.eigh(mat)
    lam = float(vals[-1])
    tol = 1e-12 * max(1.0, abs(lam))
    cand = [fix_phase(vecs[:, i]) for i in range(len(vals)) if vals[i] >= lam - tol]
    if len(cand) > 1:
        keys = [tuple(np.round(np.abs(c), 12)) for c in cand]
        cand = [c for _, c in sorted(zip(keys, cand), key=lambda t: t[0], reverse=True)]
    vec = cand[0]
    if isinstance(h, HermitianOp):
        return lam, PureState(vec, h.space)
    return lam, vec


# ---------------------------------------------------------------------------
# JSON import/export: complex numbers as [re, im] pairs, dims always included.

def _complex_out(arr: np.ndarray):
    stacked = np.stack([arr.real, arr.imag], axis=-1)
    return stacked.tolist()


def _complex_in(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def to_json_dict(obj: PureState | HermitianOp | Subspace) -> dict:
    if isinstance(obj, PureState):
        return {
            "schema": JSON_SCHEMA,
            "kind": "vector",
            "dims": list(obj.space.dims),
            "data": _complex_out(obj.amplitudes),
        }
    if isinstance(obj, HermitianOp):
        return {
            "schema": JSON_SCHEMA,
            "kind": "hermitian",
            "dims": list(obj.space.dims),
            "data": _complex_out(obj.entries),
        }
    if isinstance(obj, Subspace):
        return {
            "schema": JSON_SCHEMA,
            "kind": "subspace",
            "dims": list(obj.space.dims),
            "label": obj.label,
            "subspace_dim": obj.dim,
            "basis": _complex_out(obj.basis),
        }
    raise TypeError(f"cannot serialize {type(obj)}")


def from_json_dict(data: dict) -> PureState | HermitianOp | Subspace:
    if data.get("schema") != JSON_SCHEMA:
        raise ValueError(f"unsupported schema {data.get('schema')!r}")
    space = HilbertSpace(data["dims"])
    kind = data["kind"]
    if kind == "vector":
        return PureState(_complex_in(data["data"]), space)
    if kind == "hermitian":
        return HermitianOp(_complex_in(data["data"]), space)
    if kind == "subspace":
        return Subspace(_complex_in(data["basis"]), space, label=data.get("label", ""))
    raise ValueError(f"unknown kind {kind!r}")


def save_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_json_dict(obj), fh, indent=2, sort_keys=True)


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return from_json_dict(json.load(fh))
