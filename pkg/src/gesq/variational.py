"""Alternating (seesaw) maximisation of subspace overlap over product vectors.

The geometric measure of a subspace is one minus the largest squared overlap
between the subspace and a fully product vector; the generalized measure
replaces fully product by biproduct vectors, which reduces to a two-block
problem per bipartition.  Both maximisations are performed by cycling over
the tensor factors: with all other factors frozen, the optimal factor for
party ``i`` is the top eigenvector of the contraction of the subspace
projector with the frozen factors, so every update is an exact coordinate
maximisation and the overlap never decreases.

Restarts are independent: each draws its own RNG stream from
``(rng_seed, restart_index)``, so identical seeds give bit-identical results
and restarts are safe to farm out concurrently.  The subspace is only read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor_core import (
    Bipartition,
    HilbertSpace,
    PureState,
    Subspace,
    all_bipartitions,
    fix_phase,
    top_eigenpair,
)

_MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class SeesawConfig:
    """Convergence threshold, sweep cap, restart count, and RNG seed."""

    epsilon: float = 1e-10
    max_sweeps: int = 10_000
    restarts: int = 200
    rng_seed: int = 0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.restarts < 1:
            raise ValueError("need at least one restart")


@dataclass(frozen=True)
class RestartRecord:
    overlap: float
    sweeps: int
    converged: bool


@dataclass(frozen=True)
class SeesawResult:
    """Best overlap over all restarts, with the achieving product factors.

    ``sweeps_used`` counts the winning restart's sweeps plus the final
    polishing sweeps; ``history`` records every restart's raw outcome.
    """

    overlap: float
    entanglement: float
    optimizer: tuple[PureState, ...]
    sweeps_used: int
    converged: bool
    history: tuple[RestartRecord, ...]


def _haar_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def _contract_except(bt: np.ndarray, factors: Sequence[np.ndarray], party: int) -> np.ndarray:
    """Contraction of the basis tensor with all factors but ``party``.

    ``bt`` has one axis per party plus a trailing subspace axis; the result
    ``C`` has shape (d_party, m) and the party's overlap matrix is C C^dag.
    """
    n = len(factors)
    perm = [party] + [p for p in range(n) if p != party] + [n]
    t = bt.transpose(perm)
    for p in range(n):
        if p == party:
            continue
        t = np.tensordot(t, factors[p].conj(), axes=([1], [0]))
    return t


def _seesaw_restart(
    bt: np.ndarray,
    dims: Sequence[int],
    factors: list[np.ndarray],
    cfg: SeesawConfig,
) -> tuple[float, list[np.ndarray], int, bool]:
    n = len(dims)
    overlap = 0.0
    converged = False
    sweeps = 0
    for sweep in range(cfg.max_sweeps):
        prev = overlap
        for party in range(n):
            c = _contract_except(bt, factors, party)
            s_mat = c @ c.conj().T
            lam, vec = top_eigenpair(s_mat)
            if lam < overlap - _MONOTONE_SLACK:
                raise RuntimeError(
                    f"seesaw overlap decreased: {overlap} -> {lam} at party {party}"
                )
            overlap = max(lam, 0.0)
            factors[party] = vec
        sweeps = sweep + 1
        if sweep > 0 and overlap - prev < cfg.epsilon:
            converged = True
            break
    return overlap, factors, sweeps, converged


def _exact_overlap(bt: np.ndarray, factors: Sequence[np.ndarray]) -> float:
    t = bt
    for f in factors:
        t = np.tensordot(t, f.conj(), axes=([0], [0]))
    return float(np.sum(np.abs(t) ** 2))


def _polish(
    bt: np.ndarray,
    dims: Sequence[int],
    factors: list[np.ndarray],
    move_tol: float = 1e-10,
    max_sweeps: int = 200,
) -> tuple[list[np.ndarray], int]:
    """Extra sweeps until the factors stop moving.

    The overlap stopping rule fires while the factors are still O(sqrt(eps))
    from the fixed point; polishing drives each factor to be a top
    eigenvector of its own contraction to within the movement tolerance.
    """
    n = len(dims)
    sweeps = 0
    for _ in range(max_sweeps):
        moved = 0.0
        for party in range(n):
            c = _contract_except(bt, factors, party)
            s_mat = c @ c.conj().T
            _, vec = top_eigenpair(s_mat)
            moved = max(moved, math.sqrt(max(0.0, 1.0 - abs(np.vdot(vec, factors[party])) ** 2)))
            factors[party] = vec
        sweeps += 1
        if moved < move_tol:
            break
    return factors, sweeps


def seesaw_gm(subspace: Subspace, cfg: SeesawConfig = SeesawConfig()) -> SeesawResult:
    """Best fully-product overlap with ``subspace``; entanglement is 1 - overlap.

    Runs ``cfg.restarts`` independent seesaw ascents from Haar-random product
    vectors (party order 1..N within each sweep) and keeps the largest
    converged overlap.  The returned value upper-bounds the true maximal
    overlap from below, so ``entanglement`` upper-bounds the subspace's
    geometric measure.
    """
    dims = subspace.space.dims
    bt = subspace.basis.reshape(dims + (subspace.dim,))
    best: tuple[float, list[np.ndarray], int, bool] | None = None
    history = []
    for r in range(cfg.restarts):
        rng = np.random.default_rng(np.random.SeedSequence((cfg.rng_seed, r)))
        factors = [_haar_vector(d, rng) for d in dims]
        overlap, factors, sweeps, conv = _seesaw_restart(bt, dims, factors, cfg)
        history.append(RestartRecord(overlap, sweeps, conv))
        if best is None or overlap > best[0]:
            best = (overlap, factors, sweeps, conv)
    factors, extra = _polish(bt, list(dims), best[1])
    overlap = _exact_overlap(bt, factors)
    return SeesawResult(
        overlap=overlap,
        entanglement=1.0 - overlap,
        optimizer=tuple(
            PureState(fix_phase(f), HilbertSpace((d,))) for f, d in zip(factors, dims)
        ),
        sweeps_used=best[2] + extra,
        converged=best[3],
        history=tuple(history),
    )


def seesaw_gm_bipartition(
    subspace: Subspace,
    cut: Bipartition,
    cfg: SeesawConfig = SeesawConfig(),
) -> SeesawResult:
    """Best biproduct overlap across one cut: a two-block seesaw.

    The parties in the cut are merged into one factor and the rest into the
    other, after which the iteration is the two-party special case of
    :func:`seesaw_gm`.
    """
    space = subspace.space
    if cut.n_parties != space.n_parties:
        raise ValueError("bipartition does not match the subspace's party count")
    k = cut.parties
    kbar = cut.complement
    dk = math.prod(space.subspace_dims(k))
    dkbar = math.prod(space.subspace_dims(kbar))
    perm = list(k) + list(kbar) + [space.n_parties]
    bt = (
        subspace.basis.reshape(space.dims + (subspace.dim,))
        .transpose(perm)
        .reshape(dk, dkbar, subspace.dim)
    )
    dims = (dk, dkbar)
    best = None
    history = []
    for r in range(cfg.restarts):
        rng = np.random.default_rng(np.random.SeedSequence((cfg.rng_seed, r)))
        factors = [_haar_vector(d, rng) for d in dims]
        overlap, factors, sweeps, conv = _seesaw_restart(bt, dims, factors, cfg)
        history.append(RestartRecord(overlap, sweeps, conv))
        if best is None or overlap > best[0]:
            best = (overlap, factors, sweeps, conv)
    factors, extra = _polish(bt, dims, best[1])
    overlap = _exact_overlap(bt, factors)
    return SeesawResult(
        overlap=overlap,
        entanglement=1.0 - overlap,
        optimizer=(
            PureState(fix_phase(factors[0]), HilbertSpace(space.subspace_dims(k))),
            PureState(fix_phase(factors[1]), HilbertSpace(space.subspace_dims(kbar))),
        ),
        sweeps_used=best[2] + extra,
        converged=best[3],
        history=tuple(history),
    )


@dataclass(frozen=True)
class GgmResult:
    """Minimum over cuts of the bipartite geometric measure."""

    value: float
    cut: Bipartition
    per_cut: dict


MAX_ENUMERATED_PARTIES = 20


def ggm_via_cuts(subspace: Subspace, cfg: SeesawConfig = SeesawConfig()) -> GgmResult:
    """GGM of a subspace: minimal bipartite GM over all canonical cuts."""
    n = subspace.space.n_parties
    if n > MAX_ENUMERATED_PARTIES:
        raise ValueError(f"cut enumeration capped at N={MAX_ENUMERATED_PARTIES}")
    per_cut = {}
    best_cut = None
    best_value = None
    for cut in all_bipartitions(n):
        res = seesaw_gm_bipartition(subspace, cut, cfg)
        per_cut[cut] = res
        if best_value is None or res.entanglement < best_value:
            best_value = res.entanglement
            best_cut = cut
    return GgmResult(value=best_value, cut=best_cut, per_cut=per_cut)


# ---------------------------------------------------------------------------
# Brute-force grid oracle, for cross-checking the seesaw at tiny dimensions.

def _bloch_grid(resolution: float) -> np.ndarray:
    """All qubit states on a (theta, phi) grid with the given angular step."""
    n_theta = int(round(math.pi / resolution)) + 1
    n_phi = int(round(2 * math.pi / resolution))
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = np.linspace(0.0, 2 * math.pi, n_phi, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    states = np.stack(
        [np.cos(tt / 2), np.sin(tt / 2) * np.exp(1j * pp)], axis=-1
    ).reshape(-1, 2)
    return states


def _lambda_max_batched(mats: np.ndarray) -> np.ndarray:
    if mats.shape[-1] == 2:
        p = mats[..., 0, 0].real
        r = mats[..., 1, 1].real
        q = mats[..., 0, 1]
        return (p + r) / 2 + np.sqrt(((p - r) / 2) ** 2 + np.abs(q) ** 2)
    return np.linalg.eigvalsh(mats)[..., -1]


def grid_product_maximum(subspace: Subspace, resolution: float = math.pi / 60) -> float:
    """Fully-product overlap maximum by dense grid search; independent oracle.

    Every qubit party except the last party is swept over a Bloch-sphere
    (theta, phi) grid; the last party's factor is then optimal in closed form
    (top eigenvector of its contraction matrixel), so the only error is the
    grid resolution on the swept spheres.  Supports two parties with a
    leading qubit and three parties with two leading qubits -- enough for
    every total dimension up to 16 used in the cross-checks.
    """
    dims = subspace.space.dims
    bt = subspace.basis.reshape(dims + (subspace.dim,))
    if len(dims) == 2 and dims[0] == 2:
        grid = _bloch_grid(resolution)
        c = np.einsum("ab m, ga -> gbm", bt, grid.conj(), optimize=True)
        mats = np.einsum("gbm,gcm->gbc", c, c.conj(), optimize=True)
        return float(_lambda_max_batched(mats).max())
    if len(dims) == 3 and dims[0] == 2 and dims[1] == 2:
        grid = _bloch_grid(resolution)
        a = np.einsum("abc m, ga -> gbcm", bt, grid.conj(), optimize=True)
        best = 0.0
        chunk = 256
        for start in range(0, grid.shape[0], chunk):
            x2 = grid[start : start + chunk]
            c = np.einsum("gbcm, hb -> ghcm", a, x2.conj(), optimize=True)
            mats = np.einsum("ghcm, ghdm -> ghcd", c, c.conj(), optimize=True)
            best = max(best, float(_lambda_max_batched(mats).max()))
        return best
    raise ValueError(f"grid oracle does not support local dims {dims}")
