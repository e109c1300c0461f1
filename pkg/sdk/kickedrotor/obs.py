"""
Momentum moments, the spreading width sigma and power-law exponent fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence, Tuple

import numpy as np

from .exceptions import FitError

if TYPE_CHECKING:
    from .qkr import RotorState

MOMENT_ORDERS = (2, 4, 6)
MIN_FIT_POINTS = 10
PER_DECADE = 64


def moment(state: "RotorState", k: int) -> float:
    """
    sum(l^k |a_l|^2), accumulated from the lattice edges inward.

    Raises:
        ValueError: k not in {2, 4, 6}
    """
    if k not in MOMENT_ORDERS:
        raise ValueError(f"moment order must be one of {MOMENT_ORDERS}, got {k}")
    momenta = state.momenta
    terms = momenta.astype(float) ** k * state.probabilities()
    order = np.argsort(-np.abs(momenta), kind="stable")
    return math.fsum(terms[order])


def sigma(state: "RotorState") -> float:
    return math.sqrt(moment(state, 2))


@dataclass
class MomentSeries:
    """Observables at recorded steps. Energy is in units of epsilon, so it equals sigma^2."""
    steps: list = field(default_factory=list)
    sigma: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    m4: list = field(default_factory=list)
    m6: list = field(default_factory=list)
    norm_error: list = field(default_factory=list)
    # Drift of the last propagated state, recorded or not.
    end_norm_error: Optional[float] = None

    COLUMNS = ("step", "sigma", "energy", "m4", "m6", "norm_error")

    def append(self, step: int, state: "RotorState") -> None:
        second = moment(state, 2)
        self.steps.append(int(step))
        self.sigma.append(math.sqrt(second))
        self.energy.append(second)
        self.m4.append(moment(state, 4))
        self.m6.append(moment(state, 6))
        self.norm_error.append(float(state.norm_error))

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def final_drift(self) -> float:
        if self.end_norm_error is not None:
            return self.end_norm_error
        return self.norm_error[-1] if self.norm_error else 0.0

    def column(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name if name != "step" else "steps"), dtype=float)

    def to_rows(self) -> list[dict]:
        return [
            {name: (self.steps[i] if name == "step" else getattr(self, name)[i]) for name in self.COLUMNS}
            for i in range(len(self))
        ]


@dataclass(frozen=True)
class ExponentFit:
    c: float
    log_amplitude: float
    window: Tuple[int, int]
    residual_rms: float
    points_used: int

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "log_amplitude": self.log_amplitude,
            "n_lo": self.window[0],
            "n_hi": self.window[1],
            "residual_rms": self.residual_rms,
            "points_used": self.points_used,
        }


def record_schedule(steps: int, per_decade: int = PER_DECADE) -> list[int]:
    """Log-spaced unique steps in [1, steps], always ending at `steps`."""
    if steps < 1:
        return []
    if per_decade < 1:
        raise ValueError(f"per_decade must be >= 1, got {per_decade}")
    count = int(math.floor(per_decade * math.log10(steps))) + 1
    points = np.rint(10.0 ** (np.arange(count) / per_decade)).astype(int)
    schedule = sorted({int(n) for n in points if 1 <= n <= steps} | {steps})
    return schedule


def fit_power_law(
    steps: Sequence[float],
    values: Sequence[float],
    window: Optional[Tuple[float, float]] = None,
) -> ExponentFit:
    """
    Least-squares fit of log(values) against log(steps).

    The default window is the last decade, [max(steps)/10, max(steps)].

    Raises:
        FitError: fewer than MIN_FIT_POINTS points in the window, or a
            non-positive value inside it
    """
    n = np.asarray(steps, dtype=float)
    v = np.asarray(values, dtype=float)
    if n.size == 0:
        raise FitError("no recorded points to fit", 0)
    if window is None:
        n_hi = float(n.max())
        window = (n_hi / 10.0, n_hi)
    n_lo, n_hi = window
    if not n_lo < n_hi:
        raise FitError(f"empty fit window [{n_lo}, {n_hi}]", 0)
    inside = (n >= n_lo) & (n <= n_hi)
    used = int(np.count_nonzero(inside))
    if used < MIN_FIT_POINTS:
        raise FitError(f"only {used} points in fit window [{n_lo:g}, {n_hi:g}], need {MIN_FIT_POINTS}", used)
    if np.any(v[inside] <= 0):
        raise FitError("non-positive value inside fit window", used)

    x = np.log(n[inside])
    y = np.log(v[inside])
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    return ExponentFit(
        c=float(slope),
        log_amplitude=float(intercept),
        window=(int(math.ceil(n_lo)), int(math.floor(n_hi))),
        residual_rms=float(np.sqrt(np.mean(residual ** 2))),
        points_used=used,
    )


def fit_exponent(series: MomentSeries, window: Optional[Tuple[float, float]] = None) -> ExponentFit:
    """Exponent c of sigma(n) ~ n^c."""
    return fit_power_law(series.steps, series.sigma, window)


def fit_moment_exponent(series: MomentSeries, k: int, window: Optional[Tuple[float, float]] = None) -> ExponentFit:
    """Exponent of (m_k)^(1/k); k = 2 is the sigma exponent."""
    if k not in MOMENT_ORDERS:
        raise ValueError(f"moment order must be one of {MOMENT_ORDERS}, got {k}")
    column = {2: series.energy, 4: series.m4, 6: series.m6}[k]
    return fit_power_law(series.steps, np.asarray(column, dtype=float) ** (1.0 / k), window)
