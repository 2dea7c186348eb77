"""Closed-form entanglement values and analytic bounds.

All functions here are cheap scalar formulas.  Where an acceptance constant
is an exact rational (31/72, 3/7, ...), a ``rational=True`` switch evaluates
the formula in :mod:`fractions` arithmetic instead of floating point; that
mode is available whenever the cosine entering the formula is itself rational
(local dimensions 2 and 3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Number = Union[float, Fraction]

_RATIONAL_COS = {2: Fraction(0), 3: Fraction(1, 2)}   # cos(pi/d) for d = 2, 3


@dataclass(frozen=True)
class TridiagonalSpec:
    """Parameters of the structured d x d tridiagonal matrix.

    The matrix has ``alpha`` in the upper-left corner, ``beta`` in the
    lower-right, ``alpha + beta`` on the rest of the diagonal and ``g`` on
    the first off-diagonals.  Its spectrum has the closed form
    ``alpha + beta + 2|g| cos(k pi / d)`` (k = 1..d-1) plus one zero
    eigenvalue exactly when ``alpha * beta = |g|^2``.
    """

    alpha: float
    beta: float
    g: complex
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("matrix size must be at least 2")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")

    @property
    def closed_form_applies(self) -> bool:
        return abs(self.alpha * self.beta - abs(self.g) ** 2) <= 1e-10

    def matrix(self):
        import numpy as np

        m = np.zeros((self.d, self.d), dtype=np.complex128)
        for i in range(self.d):
            m[i, i] = self.alpha + self.beta
        m[0, 0] = self.alpha
        m[-1, -1] = self.beta
        for i in range(self.d - 1):
            m[i, i + 1] = self.g
            m[i + 1, i] = complex(self.g).conjugate()
        return m


def tridiagonal_spectrum(spec: TridiagonalSpec) -> list[float]:
    """Closed-form eigenvalues, sorted descending.

    Refuses when ``alpha * beta != |g|^2``; in that regime the closed form is
    invalid and callers must fall back to a dense eigensolver.
    """
    if not spec.closed_form_applies:
        raise ValueError(
            "closed-form spectrum needs alpha*beta = |g|^2; use a dense eigensolver"
        )
    g = abs(spec.g)
    vals = [
        spec.alpha + spec.beta + 2 * g * math.cos(k * math.pi / spec.d)
        for k in range(1, spec.d)
    ]
    vals.append(0.0)
    return sorted(vals, reverse=True)


@dataclass(frozen=True)
class CesValue:
    """Result of :func:`gm_ces_exact`: value plus a degenerate-case flag."""

    value: float
    single_vector: bool = False

    def __float__(self) -> float:
        return self.value


def gm_ces_exact(d: int, theta: float) -> CesValue:
    """Geometric measure of the two-party ``S`` subspace in C^2 x C^d.

    For d >= 3 the value is ``(1 - sqrt(1 - sin^2(theta) sin^2(pi/d))) / 2``.
    For d = 2 the subspace is a single vector and its measure
    ``min(sin^2(theta/2), cos^2(theta/2))`` is returned with a flag.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    if not 0.0 < theta < math.pi:
        raise ValueError("theta must lie strictly between 0 and pi")
    if d == 2:
        s, c = math.sin(theta / 2) ** 2, math.cos(theta / 2) ** 2
        return CesValue(min(s, c), single_vector=True)
    inner = 1.0 - (math.sin(theta) * math.sin(math.pi / d)) ** 2
    return CesValue(0.5 * (1.0 - math.sqrt(inner)))


def ggm_ges_exact(n_parties: int, d: int, theta: float) -> CesValue:
    """Generalized geometric measure of the N-party ``S`` subspace.

    Cut-independent and equal to the two-party value: the same closed form
    holds for every number of parties and every bipartition.
    """
    if n_parties < 2:
        raise ValueError("need at least two parties")
    return gm_ces_exact(d, theta)


def max_biproduct_overlap(d: int, theta: float) -> float:
    """Largest squared overlap of the ``S`` family with biproduct vectors: 1 - GGM."""
    return 1.0 - gm_ces_exact(d, theta).value


def gm_upper_bound(n_parties: int, d: int, rational: bool = False) -> Number:
    """Upper bound on the GM of ``S`` at theta = pi/2.

    One minus the product-overlap lower bound obtained by freezing every
    qudit factor at the optimal single-qudit profile:

        1 - [ (d-1+cos(pi/d))^(N-1) + ((d-1)cos(pi/d)+1)^(N-1) ] / (2 d^(N-1)).

    ``rational=True`` evaluates exactly (available for d in {2, 3}).
    """
    if n_parties < 2 or d < 2:
        raise ValueError("need N >= 2 and d >= 2")
    if rational:
        if d not in _RATIONAL_COS:
            raise ValueError(f"rational mode unavailable for d={d}")
        c = _RATIONAL_COS[d]
        w1 = Fraction(d - 1 + c, d)
        w3 = Fraction((d - 1) * c + 1, d)
        return 1 - Fraction(1, 2) * (w1 ** (n_parties - 1) + w3 ** (n_parties - 1))
    c = math.cos(math.pi / d)
    overlap = ((d - 1 + c) ** (n_parties - 1) + ((d - 1) * c + 1) ** (n_parties - 1)) / (
        2 * d ** (n_parties - 1)
    )
    return 1.0 - overlap


def antisym_gm(n_parties: int, rational: bool = False) -> Number:
    """GM of the antisymmetric subspace: 1 - 1/N!, independent of d."""
    if n_parties < 2:
        raise ValueError("need at least two parties")
    val = 1 - Fraction(1, math.factorial(n_parties))
    return val if rational else float(val)


def antisym_ggm(n_parties: int, rational: bool = False) -> Number:
    """GGM of the antisymmetric subspace: 1 - 1/N."""
    if n_parties < 2:
        raise ValueError("need at least two parties")
    val = 1 - Fraction(1, n_parties)
    return val if rational else float(val)


def witness_threshold(total_dim: int, subspace_dim: int, epsilon: float) -> float:
    """White-noise threshold ``D * eps / (D - d_G)`` of the projector witness.

    ``epsilon`` is the subspace's (generalized) geometric measure; the
    witness certifies (genuine) entanglement of the noisy projector state for
    every mixing weight below the returned value.
    """
    if subspace_dim >= total_dim:
        raise ValueError("subspace dimension must be smaller than the space dimension")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    return total_dim * epsilon / (total_dim - subspace_dim)


def witness_threshold_S(d: int) -> float:
    """Closed form of :func:`witness_threshold` for ``S`` at N = 3, theta = pi/2."""
    return 2 * d * d * math.sin(math.pi / (2 * d)) ** 2 / (d * d + 2 * d - 1)


def figure1_rows(theta_points: int = 181, dims: tuple[int, ...] = (2, 3, 4, 5, 6, 7)):
    """Grid of GM values of the two-party ``S`` family versus theta.

    Yields ``(theta, d, value)`` tuples over an inclusive [0, pi] grid; the
    endpoint values are the theta -> 0, pi limits (zero entanglement).
    """
    rows = []
    for i in range(theta_points):
        theta = math.pi * i / (theta_points - 1)
        for d in dims:
            if i == 0 or i == theta_points - 1:
                val = 0.0
            else:
                val = gm_ces_exact(d, theta).value
            rows.append((theta, d, val))
    return rows
