"""
Integer-order cylindrical Bessel functions and the kick kernel.

J_m(x) is computed by Miller's downward recurrence normalized with
J_0 + 2 * sum(J_2k) = 1. Upward recurrence is unstable for m > x, so it is
never used. An ascending power series evaluated in mpmath is kept as an
independent oracle.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special

from .config import KERNEL_TOL

MAX_ARGUMENT = 1e6
# Rescale the recurrence before it overflows.
_RESCALE = 1e250
_START_ATTEMPTS = 6
_AGREEMENT = 1e-14
_MAX_ORDER_SLACK = 4096
# The first two series terms are exact to double precision below this.
SMALL_ARGUMENT = 1e-8

# (-i)^m for m mod 4
_MINUS_I_POWERS = (1.0 + 0.0j, -1.0j, -1.0 + 0.0j, 1.0j)


@dataclass(frozen=True, eq=False)
class BesselRow:
    """J_m(argument) for m = 0..max_order."""
    argument: float
    max_order: int
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class KickKernel:
    """Momentum-space stencil K_m = i^(-m) J_m(kappa), stored for m >= 0 only.

    K_{-m} = K_m, so the negative half is never stored; `full()` mirrors it.
    """
    strength: float
    half_width: int
    coefficients: np.ndarray
    tolerance: float

    def full(self) -> np.ndarray:
        """Coefficients for m = -M..M."""
        return np.concatenate([self.coefficients[:0:-1], self.coefficients])

    def norm_sq(self) -> float:
        c = np.abs(self.coefficients) ** 2
        return float(c[0] + 2.0 * math.fsum(c[1:]))


def minus_i_power(m: np.ndarray) -> np.ndarray:
    """(-i)^m for integer arrays (negative m included)."""
    return np.asarray(_MINUS_I_POWERS)[np.mod(m, 4)]


def _start_order(x: float, max_order: int) -> int:
    top = max(max_order, int(math.ceil(x)))
    start = top + 16 + int(math.sqrt(60.0 * max(top, 1)))
    return start + (start % 2)


def _small_row(x: float, max_order: int) -> np.ndarray:
    m = np.arange(max_order + 1)
    half = 0.5 * x
    with np.errstate(under="ignore"):
        leading = np.exp(m * math.log(half) - special.gammaln(m + 1))
    return leading * (1.0 - half * half / (m + 1))


def _miller(x: float, max_order: int, start: int) -> np.ndarray:
    row = np.zeros(max_order + 1)
    norm = 0.0
    upper, current = 0.0, 1.0
    for m in range(start, 0, -1):
        if m <= max_order:
            row[m] = current
        if m % 2 == 0:
            norm += 2.0 * current
        lower = (2.0 * m / x) * current - upper
        upper, current = current, lower
        if not math.isfinite(current):
            raise ValueError(f"Bessel recurrence overflowed at order {m} for x={x}")
        if abs(current) > _RESCALE:
            upper /= _RESCALE
            current /= _RESCALE
            norm /= _RESCALE
            row[m:] /= _RESCALE
    row[0] = current
    norm += current
    return row / norm


def _converged_miller(x: float, max_order: int) -> np.ndarray:
    start = _start_order(x, max_order)
    values = _miller(x, max_order, start)
    for _ in range(_START_ATTEMPTS):
        start += 16 + start // 8
        start += start % 2
        raised = _miller(x, max_order, start)
        converged = float(np.max(np.abs(raised - values))) <= _AGREEMENT
        values = raised
        if converged:
            break
    return values


def bessel_row(x: float, max_order: int) -> BesselRow:
    """
    J_m(x) for m = 0..max_order by downward recurrence (leading series
    terms below SMALL_ARGUMENT).

    The start order is raised until two successive starts agree, so a
    max_order beyond the heuristic never degrades accuracy silently.

    Raises:
        ValueError: x is not finite, |x| too large, or max_order < 0
    """
    if not math.isfinite(x):
        raise ValueError(f"Bessel argument must be finite, got {x}")
    if abs(x) >= MAX_ARGUMENT:
        raise ValueError(f"Bessel argument too large: {x}")
    if max_order < 0:
        raise ValueError(f"max_order must be >= 0, got {max_order}")

    if x == 0.0:
        values = np.zeros(max_order + 1)
        values[0] = 1.0
        return BesselRow(argument=x, max_order=max_order, values=values)

    ax = abs(x)
    values = _small_row(ax, max_order) if ax < SMALL_ARGUMENT else _converged_miller(ax, max_order)

    if x < 0:
        values[1::2] = -values[1::2]
    values.setflags(write=False)
    return BesselRow(argument=x, max_order=max_order, values=values)


def bessel_series(x: float, m: int) -> float:
    """J_m(x) from the ascending power series, summed in high precision."""
    if m < 0:
        return (-1) ** m * bessel_series(x, -m)
    # Cancellation costs about 0.44*|x| digits.
    with mpmath.workdps(30 + int(0.5 * abs(x))):
        half = mpmath.mpf(x) / 2
        term = half ** m / mpmath.factorial(m)
        total = term
        factor = -half * half
        k = 0
        eps = mpmath.mpf(10) ** -35
        while True:
            k += 1
            term = term * factor / (k * (k + m))
            total += term
            if k > abs(x) and abs(term) < eps:
                break
        return float(total)


def truncation_order(kappa: float, tol: float = KERNEL_TOL) -> int:
    """
    Smallest M >= ceil(|kappa|) with |J_m(kappa)| < tol for m in (M, M + 32].
    """
    if not 0.0 < tol <= 1e-2:
        raise ValueError(f"tol must be in (0, 1e-2], got {tol}")
    a = abs(kappa)
    if a == 0.0:
        return 0
    floor = int(math.ceil(a))
    guess = int(math.ceil(a + 10.0 + 8.0 * a ** (1.0 / 3.0)))
    limit = guess + _MAX_ORDER_SLACK
    while True:
        row = np.abs(bessel_row(a, guess + 32).values)
        if bool(np.all(row[guess + 1:] < tol)):
            break
        guess += 32
        if guess > limit:
            raise ValueError(f"no truncation order below {limit} reaches tol={tol} for kappa={kappa}")
    above = np.nonzero(row[:guess + 1] >= tol)[0]
    last = int(above[-1]) if above.size else 0
    return max(floor, last)


@functools.lru_cache(maxsize=256)
def kick_kernel(kappa: float, tol: float = KERNEL_TOL) -> KickKernel:
    """Kick stencil for strength kappa truncated at `truncation_order`."""
    half_width = truncation_order(kappa, tol)
    row = bessel_row(kappa, half_width).values
    coefficients = minus_i_power(np.arange(half_width + 1)) * row
    coefficients.setflags(write=False)
    return KickKernel(
        strength=kappa,
        half_width=half_width,
        coefficients=coefficients,
        tolerance=tol,
    )
