"""
Closed forms at primary resonance and antiresonance.

At primary resonance every kick operator commutes with the free phase (all
phases are 1), so n kicks collapse into one kick of strength X = sum(kappa_j)
and a_l = (-i)^l J_l(X). At antiresonance the phase is (-1)^l, which flips
the sign of every other kick, giving X = |sum((-1)^j kappa_j)|. In both
cases sigma = |X| / sqrt(2), from sum(l^2 J_l(x)^2) = x^2 / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seqgen import letter_counts, letter_kappas
from .specfun import bessel_row, minus_i_power

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BallisticPrediction:
    n: int
    m1: int
    m2: int
    kappa1: float
    kappa2: float
    sigma: float
    diffusion_coefficient: float


def ballistic_prediction(letters: str, kappa1: float, kappa2: float) -> BallisticPrediction:
    """sigma(n) = D n with D = (alpha kappa1 + beta kappa2) / sqrt(2)."""
    if not letters:
        raise ValueError("letters must be nonempty")
    n = len(letters)
    m1, m2 = letter_counts(letters)
    coefficient = abs(m1 / n * kappa1 + m2 / n * kappa2) / SQRT2
    return BallisticPrediction(
        n=n,
        m1=m1,
        m2=m2,
        kappa1=kappa1,
        kappa2=kappa2,
        sigma=coefficient * n,
        diffusion_coefficient=coefficient,
    )


def primary_amplitude(l: int, kick_sum: float) -> complex:
    """(-i)^l J_l(kick_sum)."""
    order = abs(l)
    value = bessel_row(kick_sum, order).values[order]
    if l < 0 and order % 2:
        value = -value
    return complex(minus_i_power(np.array(l)) * value)


def primary_amplitudes(l_lo: int, l_hi: int, kick_sum: float) -> np.ndarray:
    """(-i)^l J_l(kick_sum) for l = l_lo..l_hi."""
    momenta = np.arange(l_lo, l_hi + 1)
    order = int(np.max(np.abs(momenta)))
    row = bessel_row(kick_sum, order).values
    values = row[np.abs(momenta)] * np.where((momenta < 0) & (momenta % 2 == 1), -1.0, 1.0)
    return minus_i_power(momenta) * values


def _kappas(letters: str, kappa1: float, kappa2: float) -> np.ndarray:
    if not letters:
        raise ValueError("letters must be nonempty")
    return letter_kappas(letters, kappa1, kappa2)


def primary_sigma(letters: str, kappa1: float, kappa2: float) -> np.ndarray:
    """sigma at n = 0..len(letters); entry n uses the first n kicks."""
    kick_sums = np.concatenate([[0.0], np.cumsum(_kappas(letters, kappa1, kappa2))])
    return np.abs(kick_sums) / SQRT2


def antiresonance_sigma(letters: str, kappa1: float, kappa2: float) -> np.ndarray:
    """sigma at n = 0..len(letters) for p/q = 1/2, signed sum with (-1)^j."""
    kappas = _kappas(letters, kappa1, kappa2)
    signs = np.where(np.arange(kappas.size) % 2 == 0, 1.0, -1.0)
    signed = np.concatenate([[0.0], np.cumsum(signs * kappas)])
    return np.abs(signed) / SQRT2
