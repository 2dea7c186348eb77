"""Constructors for the subspace families whose entanglement this package studies.

Five families are provided, each reachable from the CLI by a short label:

* ``S`` -- the qubit-times-qudits family spanned by two-term superpositions
  ``a|0>|i_2..i_N> + b|1>|i_2+1..i_N+1>`` (a completely entangled subspace
  for two parties, genuinely entangled for three or more);
* ``Q1`` and ``Q2`` -- subspaces defined as orthocomplements of continuous
  one-parameter product-vector families with polynomial coefficients;
* ``ASYM`` -- the fully antisymmetric subspace of N qudits;
* ``WSPAN`` -- the two-dimensional span of the W state and its bit-flipped
  partner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product

import numpy as np

from .tensor_core import (
    HermitianOp,
    HilbertSpace,
    PureState,
    Subspace,
    partial_transpose,
    projector_from_span,
)


@dataclass(frozen=True)
class GesParams:
    """Parameters of the ``S`` family: party count, local dimension, angles."""

    n_parties: int
    d: int
    theta: float
    xi: float = 0.0

    def __post_init__(self):
        if self.n_parties < 2:
            raise ValueError("need at least two parties")
        if self.d < 2:
            raise ValueError("local dimension must be at least 2")
        if not 0.0 < self.theta < math.pi:
            raise ValueError("theta must lie strictly between 0 and pi")
        if not 0.0 <= self.xi < 2 * math.pi:
            raise ValueError("xi must lie in [0, 2*pi)")

    @property
    def a(self) -> float:
        return math.cos(self.theta / 2)

    @property
    def b(self) -> complex:
        return complex(np.exp(1j * self.xi) * math.sin(self.theta / 2))


def ces_2xd(d: int, theta: float, xi: float = 0.0) -> Subspace:
    """Completely entangled subspace of C^2 x C^d, dimension d - 1.

    Spanned by ``a|0>|i> + b|1>|i+1>`` for ``i = 0..d-2``; the spanning
    vectors are orthonormal as given.
    """
    params = GesParams(2, d, theta, xi)
    return ges_2xd_pow(params)


def ges_2xd_pow(params: GesParams) -> Subspace:
    """The ``S`` family over C^2 x (C^d)^(N-1), dimension (d-1)^(N-1).

    For N = 2 this reduces to :func:`ces_2xd`.  The local bases on the qudit
    parties are fixed to the computational basis; any other choice is related
    by local unitaries and carries the same entanglement.
    """
    n, d = params.n_parties, params.d
    a, b = params.a, params.b
    space = HilbertSpace((2,) + (d,) * (n - 1))
    db = d ** (n - 1)
    cols = []
    for ii in product(range(d - 1), repeat=n - 1):
        v = np.zeros(space.dim, dtype=np.complex128)
        lo = 0
        hi = 0
        for i in ii:
            lo = lo * d + i
            hi = hi * d + (i + 1)
        v[lo] = a            # |0>|i_2 .. i_N>
        v[db + hi] = b       # |1>|i_2+1 .. i_N+1>
        cols.append(v)
    basis = np.stack(cols, axis=1)
    label = f"S(N={n},d={d},theta={params.theta:.6g})"
    return Subspace(basis, space, label=label, raw_vectors=basis.T)


@dataclass(frozen=True)
class Q1IndexScheme:
    """Index arithmetic for the ``Q1`` family: p_i = i * p_1 on the joint qudit factor."""

    n_parties: int
    d: int

    @property
    def p1(self) -> int:
        return sum(self.d ** (self.n_parties - m) for m in range(2, self.n_parties + 1))

    def p(self, i: int) -> int:
        return i * self.p1


def cyclic_chain_orthonormalize(gammas: list[PureState]) -> list[PureState]:
    """Orthonormal basis for the span of successive differences of a chain.

    Given mutually orthonormal ``gamma_0 .. gamma_S``, the span of the S
    difference vectors ``(gamma_(k-1) - gamma_k)/sqrt(2)`` has the closed-form
    orthonormal basis

        phi_m = (gamma_0 + .. + gamma_(m-1) - m*gamma_m) / sqrt(m(m+1)),

    for ``m = 1..S``, which this function returns.
    """
    if len(gammas) < 2:
        raise ValueError("a chain needs at least two vectors")
    space = gammas[0].space
    mat = np.stack([g.amplitudes for g in gammas], axis=1)
    gram = mat.conj().T @ mat
    if float(np.abs(gram - np.eye(mat.shape[1])).max()) > 1e-10:
        raise ValueError("input vectors are not orthonormal")
    out = []
    for m in range(1, len(gammas)):
        v = mat[:, :m].sum(axis=1) - m * mat[:, m]
        out.append(PureState(v / math.sqrt(m * (m + 1)), space))
    return out


def _q1_chains(n: int, d: int) -> list[list[int]]:
    """Chains of joint-basis flat indices whose successive differences span Q1.

    Each chain is a list of flat indices of the kets ``|i>|c>``; the
    generating vectors of the family are ``|i>|c_i> - |i+1>|c_(i+1)>`` along
    each chain, and distinct chains use disjoint kets.
    """
    scheme = Q1IndexScheme(n, d)
    p1 = scheme.p1
    db = d ** (n - 1)

    def ket(i: int, c: int) -> int:
        return i * db + c

    chains: list[list[int]] = []
    for m in range(1, d - 1):
        for k in range(p1):
            chains.append([ket(i, scheme.p(m - i) + k) for i in range(m + 1)])
    chains.append([ket(i, scheme.p(d - 1 - i)) for i in range(d)])
    for m in range(d - 1, 2 * d - 3):
        for k in range(p1):
            chains.append(
                [ket(i, scheme.p(m - i) + k + 1) for i in range(m - (d - 2), d)]
            )
    return chains


def q1_subspace(n_parties: int, d: int) -> Subspace:
    """The ``Q1`` family over (C^d)^N, dimension d^N - (2 d^(N-1) - 1).

    Constructed chain by chain with :func:`cyclic_chain_orthonormalize`; the
    unnormalized difference vectors are kept as ``raw_vectors``.
    """
    if n_parties < 2 or d < 2:
        raise ValueError("Q1 needs N >= 2 and d >= 2")
    space = HilbertSpace((d,) * n_parties)
    cols = []
    raw = []
    for chain in _q1_chains(n_parties, d):
        gam = np.zeros((space.dim, len(chain)))
        for j, flat in enumerate(chain):
            gam[flat, j] = 1.0
        for m in range(1, len(chain)):
            v = gam[:, :m].sum(axis=1) - m * gam[:, m]
            cols.append(v / math.sqrt(m * (m + 1)))
            raw.append(gam[:, m - 1] - gam[:, m])
    basis = np.stack(cols, axis=1)
    expected = d ** n_parties - (2 * d ** (n_parties - 1) - 1)
    if basis.shape[1] != expected:
        raise AssertionError(
            f"Q1 dimension {basis.shape[1]} != expected {expected}"
        )
    return Subspace(
        basis, space, label=f"Q1(N={n_parties},d={d})", raw_vectors=np.stack(raw, axis=0)
    )


def q1_product_family_vector(n_parties: int, d: int, alpha: complex) -> np.ndarray:
    """One member of the product family that Q1 is orthogonal to."""
    scheme = Q1IndexScheme(n_parties, d)
    db = d ** (n_parties - 1)
    va = np.array([alpha ** scheme.p(i) for i in range(d)], dtype=np.complex128)
    vb = np.array([alpha ** k for k in range(db)], dtype=np.complex128)
    return np.kron(va, vb)


def _q2_monomial_family(n: int, d: int) -> np.ndarray:
    """Coefficient vectors (one per monomial degree) spanning the Q2-orthogonal family.

    The defining product vectors are polynomials in one complex parameter, so
    their span equals the span of the per-degree coefficient vectors returned
    here (rows), which have small-integer entries.
    """
    db = d ** (n - 1)
    dim = d * db
    max_exp = (d - 1) * d ** (n - 2) + db - 1
    fam = np.zeros((max_exp + 1, dim))
    for m in range(db):
        fam[m, m] += 1.0                       # first local component is 1
    for k in range(1, d):
        for f in range(2, n + 1):
            e = k * d ** (n - f)
            for m in range(db):
                fam[e + m, k * db + m] += 1.0
    return fam


def q2_subspace(n_parties: int, d: int) -> Subspace:
    """The ``Q2`` family over (C^d)^N, dimension d^(N-2) (d-1)^2.

    Built as the orthocomplement of its defining product-vector family.  The
    two-term difference vectors ``|0>(sum_f |k d^(N-f) + m>) - |k>|m>`` span
    the whole subspace only when every referenced ket index stays in range
    (always true for d = 2); the valid ones are kept as ``raw_vectors``.
    """
    if n_parties < 3 or d < 2:
        raise ValueError("Q2 needs N >= 3 and d >= 2")
    space = HilbertSpace((d,) * n_parties)
    fam = _q2_monomial_family(n_parties, d)
    _, s, vh = np.linalg.svd(fam, full_matrices=True)
    rank = int(np.sum(s > 1e-9 * s[0]))
    basis = vh[rank:].conj().T
    expected = d ** (n_parties - 2) * (d - 1) ** 2
    if basis.shape[1] != expected:
        raise AssertionError(
            f"Q2 dimension {basis.shape[1]} != expected {expected}"
        )
    db = d ** (n_parties - 1)
    raw = []
    for k in range(1, d):
        for m in range(db - d ** (n_parties - 2)):
            idx = [k * d ** (n_parties - f) + m for f in range(2, n_parties + 1)]
            if max(idx) >= db:
                continue
            v = np.zeros(space.dim)
            for e in idx:
                v[e] += 1.0
            v[k * db + m] -= 1.0
            raw.append(v)
    return Subspace(
        basis,
        space,
        label=f"Q2(N={n_parties},d={d})",
        raw_vectors=np.stack(raw, axis=0) if raw else None,
    )


def q2_product_family_vector(n_parties: int, d: int, alpha: complex) -> np.ndarray:
    """One member of the product family that Q2 is orthogonal to."""
    db = d ** (n_parties - 1)
    va = np.zeros(d, dtype=np.complex128)
    va[0] = 1.0
    for k in range(1, d):
        va[k] = sum(alpha ** (k * d ** (n_parties - f)) for f in range(2, n_parties + 1))
    vb = np.array([alpha ** m for m in range(db)], dtype=np.complex128)
    return np.kron(va, vb)


def _perm_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def antisymmetric_subspace(d: int, n_parties: int) -> Subspace:
    """Fully antisymmetric subspace of (C^d)^N, dimension binomial(d, N).

    Every basis vector flips sign under any transposition of parties; needs
    d >= N, otherwise the subspace is empty.
    """
    if d < n_parties:
        raise ValueError("antisymmetric subspace needs d >= N")
    space = HilbertSpace((d,) * n_parties)
    norm = 1.0 / math.sqrt(math.factorial(n_parties))
    cols = []
    from itertools import combinations

    for combo in combinations(range(d), n_parties):
        v = np.zeros(space.dim)
        for perm in permutations(range(n_parties)):
            flat = 0
            for p in range(n_parties):
                flat = flat * d + combo[perm[p]]
            v[flat] += _perm_sign(perm) * norm
        cols.append(v)
    basis = np.stack(cols, axis=1)
    return Subspace(basis, space, label=f"ASYM(N={n_parties},d={d})", raw_vectors=basis.T)


def w_span_subspace(n_parties: int) -> Subspace:
    """Span of the N-qubit W state and its bit-flipped complement; dimension 2."""
    if n_parties < 3:
        raise ValueError("the W span is a proper subspace only for N >= 3")
    space = HilbertSpace((2,) * n_parties)
    w = np.zeros(space.dim)
    wbar = np.zeros(space.dim)
    for i in range(n_parties):
        w[1 << (n_parties - 1 - i)] = 1.0
        wbar[(space.dim - 1) ^ (1 << (n_parties - 1 - i))] = 1.0
    w /= math.sqrt(n_parties)
    wbar /= math.sqrt(n_parties)
    basis = np.stack([w, wbar], axis=1)
    return Subspace(basis, space, label=f"WSPAN(N={n_parties})", raw_vectors=basis.T)


@dataclass(frozen=True)
class ReductionReport:
    equivalent: bool
    projector_distance: float
    dim: int


def verify_local_unitary_reduction(d: int, atol: float = 1e-9) -> ReductionReport:
    """Check that the d x 2 x d difference family maps onto ``S`` at theta = pi/2.

    The subspace spanned by ``(|i>|1>|k+1> - |i+1>|0>|k>)/sqrt(2)`` in a
    d (x) 2 (x) d arrangement becomes the three-party ``S`` family after a
    basis reversal on the last qudit, the rotation ``|0> -> -|1>, |1> -> |0>``
    on the qubit, and a swap of the first two parties.  Returns the projector
    distance between the transformed span and ``ges_2xd_pow(N=3, d, pi/2)``.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    space = HilbertSpace((d, 2, d))
    cols = []
    for i in range(d - 1):
        for k in range(d - 1):
            v = np.zeros(space.dim)
            v[space.flat_index((i, 1, k + 1))] = 1.0
            v[space.flat_index((i + 1, 0, k))] = -1.0
            cols.append(v / math.sqrt(2.0))
    mat = np.stack(cols, axis=1)

    u_rev = np.zeros((d, d))
    for i in range(d):
        u_rev[d - 1 - i, i] = 1.0
    u_qubit = np.array([[0.0, 1.0], [-1.0, 0.0]])   # |0> -> -|1>, |1> -> |0>
    u_full = np.kron(np.eye(d), np.kron(u_qubit, u_rev))
    mat = u_full @ mat

    # swap parties 1 and 2 (the d and the qubit)
    tens = mat.reshape(d, 2, d, mat.shape[1])
    mat = tens.transpose(1, 0, 2, 3).reshape(space.dim, mat.shape[1])

    sub = projector_from_span(list(mat.T), HilbertSpace((2, d, d)))
    target = ges_2xd_pow(GesParams(3, d, math.pi / 2))
    dist = float(
        np.abs(sub.projector.entries - target.projector.entries).max()
    )
    return ReductionReport(equivalent=dist <= atol, projector_distance=dist, dim=sub.dim)


@dataclass(frozen=True)
class PptGapReport:
    trace: Fraction
    overlap_with_subspace: Fraction
    overlap_with_complement: Fraction
    ppt_min_eigenvalues: dict
    is_ppt_all_cuts: bool


_PPT_GAP_PARAMS = {
    "a": Fraction(9, 10),
    "b": Fraction(14, 25),
    "c": Fraction(7, 25),
    "x": Fraction(1, 30),
    "y": Fraction(1, 14),
    "z": Fraction(1, 7),
    "alpha": Fraction(7, 25),
    "beta": Fraction(24, 25),   # sqrt(1 - alpha^2), exact here
}


def ppt_gap_state() -> tuple[HermitianOp, PptGapReport]:
    """A qubit-qutrit-qutrit state that is PPT across all three cuts.

    Its overlap with the complement of ``S(N=3, d=3, theta=pi/2)`` equals
    239371/568000, strictly below the subspace's fully-product overlap
    minimum 3/7 -- exactly the feasible point that forces the PPT relaxation
    of that minimum to come out below 3/7.  The overlaps are computed in
    exact rational arithmetic.
    """
    p = _PPT_GAP_PARAMS
    a, b, c = p["a"], p["b"], p["c"]
    x, y, z = p["x"], p["y"], p["z"]
    al, be = p["alpha"], p["beta"]
    assert al * al + be * be == 1

    norm = 2 * (a + b + c + 2 * x + y + 2 * z)
    rho = [[Fraction(0) for _ in range(18)] for _ in range(18)]

    def put(i, j, v):
        rho[i][j] = v
        rho[j][i] = v

    put(0, 0, a * al * al)
    put(0, 13, a * al * be)
    put(1, 1, (b + c) / 2)
    put(1, 14, (b - c) / 2)
    put(2, 2, x)
    put(3, 3, (b + c) / 2)
    put(3, 16, (b - c) / 2)
    put(4, 4, a * be * be)
    put(4, 17, a * al * be)
    for i, v in [(5, z), (6, x), (7, z), (8, y), (9, y), (10, z), (11, x), (12, z)]:
        put(i, i, v)
    put(13, 13, a * be * be)
    put(14, 14, (b + c) / 2)
    put(15, 15, x)
    put(16, 16, (b + c) / 2)
    put(17, 17, a * al * al)
    rho = [[v / norm for v in row] for row in rho]

    trace = sum(rho[i][i] for i in range(18))

    # spanning kets of S(3,3,pi/2): pairs (|0ij>, |1,i+1,j+1>) as flat indices
    pairs = [(0, 13), (1, 14), (3, 16), (4, 17)]
    overlap = Fraction(0)
    for (u, v) in pairs:
        overlap += Fraction(1, 2) * (rho[u][u] + rho[v][v] + rho[u][v] + rho[v][u])

    space = HilbertSpace((2, 3, 3))
    dense = np.array([[float(v) for v in row] for row in rho])
    op = HermitianOp(dense, space)
    min_eigs = {}
    for parties in [(0,), (1,), (2,)]:
        pt = partial_transpose(op, parties)
        min_eigs[parties] = float(pt.eigvals().min())
    report = PptGapReport(
        trace=trace,
        overlap_with_subspace=overlap,
        overlap_with_complement=1 - overlap,
        ppt_min_eigenvalues=min_eigs,
        is_ppt_all_cuts=all(v >= -1e-10 for v in min_eigs.values()),
    )
    return op, report


SUBSPACE_LABELS = ("S", "Q1", "Q2", "ASYM", "WSPAN")


def by_label(
    label: str,
    n_parties: int,
    d: int = 2,
    theta: float = math.pi / 2,
    xi: float = 0.0,
) -> Subspace:
    """CLI-facing dispatch from a short label to a constructed subspace."""
    label = label.upper()
    if label == "S":
        return ges_2xd_pow(GesParams(n_parties, d, theta, xi))
    if label == "Q1":
        return q1_subspace(n_parties, d)
    if label == "Q2":
        return q2_subspace(n_parties, d)
    if label == "ASYM":
        return antisymmetric_subspace(d, n_parties)
    if label == "WSPAN":
        return w_span_subspace(n_parties)
    raise ValueError(f"unknown subspace label {label!r}; choose from {SUBSPACE_LABELS}")
