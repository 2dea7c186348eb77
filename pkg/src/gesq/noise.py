"""White-noise robustness of states built from an entangled subspace.

The reference family mixes the normalized projector onto a subspace G with
white noise,

    rho_G(p) = (1 - p) P_G / d_G + p I / D,

and the question is up to which mixing weight p a detector still certifies
(genuine) entanglement.  Closed-form thresholds come from the projector
witness; beyond that, thresholds are located by bisecting the mixing weight
against the SDP detectors of :mod:`gesq.sdp`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import exact
from .sdp import SolverOptions, fidelity_ggm_bound, fidelity_gm_bound, ppt_mixture_monotone
from .tensor_core import HermitianOp, Subspace

DETECTION_FLOOR = 1e-7   # solver noise floor: smaller detector values count as zero

DETECTORS = ("pptmix", "fidelity-GM", "fidelity-GGM")


@dataclass(frozen=True)
class NoisyGesState:
    """The family rho_G(p); ``p = 0`` is the normalized projector, ``p = 1`` white noise."""

    subspace: Subspace
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("mixing weight must lie in [0, 1]")

    def density(self) -> HermitianOp:
        sub = self.subspace
        d_total = sub.space.dim
        mat = (1.0 - self.p) * sub.projector.entries / sub.dim + self.p * np.eye(d_total) / d_total
        return HermitianOp(mat, sub.space)

    def eigenvalues(self) -> tuple[float, float]:
        """The two distinct eigenvalues: on the subspace and off it."""
        d_total = self.subspace.space.dim
        on = (1.0 - self.p) / self.subspace.dim + self.p / d_total
        off = self.p / d_total
        return on, off


def make_noisy_state(subspace: Subspace, p: float) -> HermitianOp:
    return NoisyGesState(subspace, p).density()


def ges_witness(subspace: Subspace, epsilon: float) -> HermitianOp:
    """Projector witness [(1-eps) I - P_G] / [(1-eps) D - d_G].

    Negative expectation certifies genuine entanglement when ``epsilon`` is
    the subspace GGM, or plain entanglement when it is the subspace GM.  The
    normalization requires ``epsilon < 1 - d_G/D`` (otherwise the denominator
    changes sign and the witness is useless).
    """
    d_total = subspace.space.dim
    d_g = subspace.dim
    denom = (1.0 - epsilon) * d_total - d_g
    if epsilon >= 1.0 - d_g / d_total or denom <= 0:
        raise ValueError("epsilon too large for this subspace: witness denominator flips sign")
    mat = ((1.0 - epsilon) * np.eye(d_total) - subspace.projector.entries) / denom
    return HermitianOp(mat, subspace.space)


def witness_value(subspace: Subspace, state: HermitianOp, epsilon: float) -> float:
    """tr(W state) for the projector witness; negative means detected."""
    w = ges_witness(subspace, epsilon)
    return float(np.trace(w.entries @ state.entries).real)


def witness_value_mixture(subspace: Subspace, p: float, epsilon: float) -> float:
    """Closed-form witness expectation on (1-p) sigma_G + p I/D.

    Holds for any sigma_G supported on the subspace:
    [p (D - d_G) / D - eps] / [(1-eps) D - d_G].
    """
    d_total = subspace.space.dim
    d_g = subspace.dim
    denom = (1.0 - epsilon) * d_total - d_g
    if denom <= 0:
        raise ValueError("epsilon too large for this subspace")
    return (p * (d_total - d_g) / d_total - epsilon) / denom


@dataclass(frozen=True)
class ThresholdResult:
    """A located noise threshold with its certificate data."""

    p_star: float
    method: str
    target: str                     # "gme" | "ent"
    bracket: tuple[float, float]
    detector_at_bracket: tuple[float, float]
    monotone: bool
    samples: tuple[tuple[float, float], ...] = field(default_factory=tuple)


def threshold_witness(subspace: Subspace, target: str, epsilon: float) -> ThresholdResult:
    """Exact witness threshold D*eps/(D - d_G); no bisection needed.

    ``epsilon`` must be the subspace GGM for ``target='gme'`` or the subspace
    GM for ``target='ent'`` (from the exact formulas where available, else
    from the variational estimate).
    """
    if target not in ("gme", "ent"):
        raise ValueError("target must be 'gme' or 'ent'")
    p_star = exact.witness_threshold(subspace.space.dim, subspace.dim, epsilon)
    value_at = witness_value_mixture(subspace, p_star, epsilon)
    return ThresholdResult(
        p_star=p_star,
        method="witness",
        target=target,
        bracket=(p_star, p_star),
        detector_at_bracket=(value_at, value_at),
        monotone=True,
        samples=((p_star, value_at),),
    )


def _detector_fn(name: str, options: SolverOptions) -> Callable[[HermitianOp], float]:
    if name == "pptmix":
        return lambda rho: ppt_mixture_monotone(rho, options=options).value
    if name == "fidelity-GM":
        return lambda rho: fidelity_gm_bound(rho, options=options).value
    if name == "fidelity-GGM":
        return lambda rho: fidelity_ggm_bound(rho, options=options).value
    raise ValueError(f"unknown detector {name!r}; choose from {DETECTORS}")


def detector_target(name: str) -> str:
    """Which kind of entanglement a detector certifies."""
    return "ent" if name == "fidelity-GM" else "gme"


def threshold_bisect(
    subspace: Subspace,
    detector: str | Callable[[HermitianOp], float],
    tol_p: float = 2e-3,
    options: SolverOptions = SolverOptions(),
    prescan_points: int = 9,
) -> ThresholdResult:
    """Bisection for the mixing weight where a detector stops firing.

    An evenly spaced pre-scan over [0, 1] locates the sign change first
    (detectors can be exactly zero over a whole tail, which would break a
    naive bracket), then bisection shrinks the bracket below ``tol_p``.
    Monotonicity of the detector in p is checked on all evaluated samples;
    a violation is flagged and the widest conservative bracket is used.
    """
    if isinstance(detector, str):
        name = detector
        fn = _detector_fn(detector, options)
        target = detector_target(detector)
    else:
        name = getattr(detector, "__name__", "custom")
        fn = detector
        target = "gme"

    samples: dict[float, float] = {}

    def evaluate(p: float) -> float:
        if p not in samples:
            samples[p] = fn(make_noisy_state(subspace, p))
        return samples[p]

    grid = np.linspace(0.0, 1.0, prescan_points)
    values = [evaluate(float(p)) for p in grid]

    detected = [v > DETECTION_FLOOR for v in values]
    if not detected[0]:
        return ThresholdResult(
            p_star=0.0,
            method=name,
            target=target,
            bracket=(0.0, 0.0),
            detector_at_bracket=(values[0], values[0]),
            monotone=True,
            samples=tuple(sorted(samples.items())),
        )

    # widest conservative bracket: the largest detected weight, and the
    # smallest undetected weight above it (robust to non-monotone samples)
    monotone = all(values[i] >= values[i + 1] - 1e-6 for i in range(len(values) - 1))
    lo = max(float(p) for p, d in zip(grid, detected) if d)
    above = [float(p) for p, d in zip(grid, detected) if not d and float(p) > lo]
    hi = min(above) if above else 1.0

    while hi - lo > tol_p:
        mid = 0.5 * (lo + hi)
        if evaluate(mid) > DETECTION_FLOOR:
            lo = mid
        else:
            hi = mid

    return ThresholdResult(
        p_star=0.5 * (lo + hi),
        method=name,
        target=target,
        bracket=(lo, hi),
        detector_at_bracket=(samples[lo], samples[hi]),
        monotone=monotone,
        samples=tuple(sorted(samples.items())),
    )
