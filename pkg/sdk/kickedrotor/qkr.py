"""
Resonant kicked rotor: state, one-period propagator and time evolution.

Units are hbar = 1, epsilon = 1, T = 1, so time is the step count and the
resonance is fixed by (p, q) alone. One period applies the free phase on
the source site, then the kick:

    a_l(n+1) = sum_j K_{j-l} phi_j a_j(n)

Two implementations exist: a banded convolution with the truncated kick
kernel (`step_direct`) and an FFT split-operator step that applies the kick
as exp(-i kappa cos theta) on a uniform angle grid (`step_split_spectral`).
Each serves as the oracle of the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
from scipy import fft

from .config import (
    EDGE_FRACTION,
    EDGE_THRESHOLD,
    GROWTH_CHUNK,
    KERNEL_TOL,
    LEAK_AMPLITUDE_SQ,
    MAX_SITES,
    NORM_DRIFT_ABORT,
    log,
)
from .exceptions import GridLimitError, NormDriftError
from .obs import MomentSeries
from .seqgen import KickSequence
from .specfun import kick_kernel, truncation_order

STANDARD = "standard"
LITERAL_EQ3 = "literal_eq3"
CONVENTIONS = (STANDARD, LITERAL_EQ3)

SPLIT_SPECTRAL = "split_spectral"
DIRECT_CONVOLUTION = "direct_convolution"
METHODS = (SPLIT_SPECTRAL, DIRECT_CONVOLUTION)


@dataclass(frozen=True, eq=False)
class ResonanceParams:
    """
    Resonance tau = 4*pi*p/q and its free-evolution phase table.

    phase_table[r] is the phase at every site l with l mod q == r. The
    standard convention uses exp(-2*pi*i*p*r^2/q); `literal_eq3` takes the
    printed exponent literally, exp(-8*pi*i*p*r^2/q), under which p/q = 1/2
    is no longer an antiresonance.
    """
    p: int
    q: int
    convention: str
    phase_table: np.ndarray

    @classmethod
    def create(cls, p: int, q: int, convention: str = STANDARD) -> "ResonanceParams":
        if q < 1:
            raise ValueError(f"q must be >= 1, got {q}")
        if p < 1:
            raise ValueError(f"p must be >= 1, got {p}")
        if math.gcd(p, q) != 1:
            raise ValueError(f"p and q must be coprime, got {p}/{q}")
        if convention not in CONVENTIONS:
            raise ValueError(f"unknown phase convention: {convention}")
        scale = 2.0 if convention == STANDARD else 8.0
        r = np.arange(q)
        # p*r^2 mod q in exact integers keeps the phase argument small
        residues = (p * r * r) % q
        table = np.exp(-1j * scale * np.pi * residues / q)
        table.setflags(write=False)
        return cls(p=p, q=q, convention=convention, phase_table=table)

    @property
    def is_primary(self) -> bool:
        return self.q == 1

    @property
    def is_antiresonance(self) -> bool:
        return self.p == 1 and self.q == 2

    def phases(self, l_min: int, size: int) -> np.ndarray:
        return self.phase_table[np.mod(np.arange(l_min, l_min + size), self.q)]

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


@dataclass
class RotorState:
    """Amplitudes a_l on the lattice l = l_min .. l_min + size - 1 after `step` periods."""
    amplitudes: np.ndarray
    l_min: int
    step: int = 0
    norm_error: float = 0.0

    @property
    def size(self) -> int:
        return int(self.amplitudes.size)

    @property
    def l_max(self) -> int:
        return self.l_min + self.size - 1

    @property
    def momenta(self) -> np.ndarray:
        return np.arange(self.l_min, self.l_min + self.size)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return math.fsum(self.probabilities())

    def amplitude(self, l: int) -> complex:
        if l < self.l_min or l > self.l_max:
            return 0j
        return complex(self.amplitudes[l - self.l_min])

    def window(self, l_lo: int, l_hi: int) -> np.ndarray:
        """Amplitudes over [l_lo, l_hi], zero outside the lattice."""
        out = np.zeros(l_hi - l_lo + 1, dtype=complex)
        lo = max(l_lo, self.l_min)
        hi = min(l_hi, self.l_max)
        if lo <= hi:
            out[lo - l_lo:hi - l_lo + 1] = self.amplitudes[lo - self.l_min:hi - self.l_min + 1]
        return out

    def edge_mass(self, fraction: float = EDGE_FRACTION, min_band: int = 1) -> float:
        """Larger of the two outer-band probabilities; each band spans at least min_band sites."""
        band = min(self.size, max(1, min_band, int(math.ceil(fraction * self.size))))
        prob = self.probabilities()
        return max(math.fsum(prob[:band]), math.fsum(prob[-band:]))

    def padded(self, extra: int) -> "RotorState":
        return RotorState(
            amplitudes=np.pad(self.amplitudes, extra),
            l_min=self.l_min - extra,
            step=self.step,
            norm_error=self.norm_error,
        )


@dataclass(frozen=True)
class GridPolicy:
    """Lattice sizing. initial_half_width = 0 means 4x the largest kernel half-width."""
    initial_half_width: int = 0
    growth_chunk: int = GROWTH_CHUNK
    edge_threshold: float = EDGE_THRESHOLD
    max_sites: int = MAX_SITES


@dataclass(frozen=True)
class PropagatorConfig:
    resonance: ResonanceParams
    sequence: KickSequence
    method: str = SPLIT_SPECTRAL
    kernel_tol: float = KERNEL_TOL
    grid_policy: GridPolicy = field(default_factory=GridPolicy)

    def __post_init__(self) -> None:
        if self.kernel_tol <= 0:
            raise ValueError(f"kernel_tol must be > 0, got {self.kernel_tol}")
        if self.method not in METHODS:
            raise ValueError(f"unknown propagation method: {self.method}")

    @property
    def kappa1(self) -> float:
        return self.sequence.kappa1

    @property
    def kappa2(self) -> float:
        return self.sequence.kappa2

    @property
    def steps(self) -> int:
        return self.sequence.length

    def initial_half_width(self) -> int:
        if self.grid_policy.initial_half_width > 0:
            return self.grid_policy.initial_half_width
        largest = max(abs(self.kappa1), abs(self.kappa2))
        return max(16, 4 * truncation_order(largest, self.kernel_tol))


def new_state_delta(half_width: int = 16) -> RotorState:
    """a_0 = 1 on the lattice [-half_width, half_width]."""
    if half_width < 0:
        raise ValueError(f"half_width must be >= 0, got {half_width}")
    amplitudes = np.zeros(2 * half_width + 1, dtype=complex)
    amplitudes[half_width] = 1.0
    return RotorState(amplitudes=amplitudes, l_min=-half_width)


def _grow(state: RotorState, chunk: int, max_sites: int) -> RotorState:
    sites = state.size + 2 * chunk
    if sites > max_sites:
        raise GridLimitError(f"lattice would grow to {sites} sites (cap {max_sites})", sites)
    return state.padded(chunk)


def maybe_expand_grid(state: RotorState, policy: GridPolicy, half_width: int = 0) -> RotorState:
    """
    Pad by growth_chunk per side until the outer bands hold less than
    edge_threshold. Bands are at least two kernel half-widths wide so the
    front cannot cross one in a single kick.
    """
    grown = state
    while grown.edge_mass(min_band=2 * half_width) >= policy.edge_threshold:
        grown = _grow(grown, policy.growth_chunk, policy.max_sites)
    if grown is not state:
        log(f"grid_grow sites={grown.size} step={state.step}")
    return grown


def _peak(values: np.ndarray) -> float:
    return float(np.max(np.abs(values) ** 2)) if values.size else 0.0


class Propagator:
    """
    One-period Floquet map for a fixed resonance.

    Owns the kernel, phase and angle-grid caches and the FFT workspace of
    one evolution; never share an instance between threads.
    """

    def __init__(
        self,
        params: ResonanceParams,
        method: str = SPLIT_SPECTRAL,
        kernel_tol: float = KERNEL_TOL,
        policy: Optional[GridPolicy] = None,
    ) -> None:
        if method not in METHODS:
            raise ValueError(f"unknown propagation method: {method}")
        self.params = params
        self.method = method
        self.kernel_tol = kernel_tol
        self.policy = policy or GridPolicy()
        self._phase_key: Tuple[int, int] = (0, -1)
        self._phase: np.ndarray = np.empty(0, dtype=complex)
        self._kick_grid = 0
        self._kick: Dict[float, np.ndarray] = {}

    def _phases(self, state: RotorState) -> np.ndarray:
        key = (state.l_min, state.size)
        if key != self._phase_key:
            self._phase = self.params.phases(state.l_min, state.size)
            self._phase_key = key
        return self._phase

    def _kick_factor(self, kappa: float, grid: int) -> np.ndarray:
        if grid != self._kick_grid:
            self._kick = {}
            self._kick_grid = grid
        factor = self._kick.get(kappa)
        if factor is None:
            theta = 2.0 * np.pi * np.arange(grid) / grid
            factor = np.exp(-1j * kappa * np.cos(theta))
            self._kick[kappa] = factor
        return factor

    def _direct(self, source: np.ndarray, kappa: float) -> Tuple[np.ndarray, float]:
        kernel = kick_kernel(kappa, self.kernel_tol)
        return np.convolve(source, kernel.full()), 0.0

    def _spectral(self, source: np.ndarray, l_min: int, kappa: float, half_width: int) -> Tuple[np.ndarray, float]:
        size = source.size
        span = size + 2 * half_width
        grid = 1 << int(math.ceil(math.log2(span + half_width + 1)))
        work = np.zeros(grid, dtype=complex)
        work[np.mod(np.arange(l_min, l_min + size), grid)] = source
        angle = fft.ifft(work, workers=1)
        angle *= self._kick_factor(kappa, grid)
        result = fft.fft(angle, workers=1)
        window = np.mod(np.arange(l_min - half_width, l_min - half_width + span), grid)
        extended = result[window]
        outside = np.ones(grid, dtype=bool)
        outside[window] = False
        return extended, _peak(result[outside])

    def step(self, state: RotorState, kappa: float) -> RotorState:
        """
        Advance one period with kick strength kappa.

        Amplitudes that would leave the lattice are checked before cropping;
        if any |a|^2 exceeds LEAK_AMPLITUDE_SQ the lattice is grown and the
        step retried.
        """
        half_width = kick_kernel(kappa, self.kernel_tol).half_width
        while True:
            source = state.amplitudes * self._phases(state)
            if self.method == DIRECT_CONVOLUTION:
                extended, outside = self._direct(source, kappa)
            else:
                extended, outside = self._spectral(source, state.l_min, kappa, half_width)
            leak = outside
            if half_width:
                leak = max(leak, _peak(extended[:half_width]), _peak(extended[-half_width:]))
            if leak <= LEAK_AMPLITUDE_SQ:
                break
            state = _grow(state, self.policy.growth_chunk, self.policy.max_sites)
            log(f"step_retry leak={leak:.3e} sites={state.size} step={state.step}")

        amplitudes = np.ascontiguousarray(extended[half_width:half_width + state.size])
        stepped = RotorState(amplitudes=amplitudes, l_min=state.l_min, step=state.step + 1)
        stepped.norm_error = abs(stepped.norm() - 1.0)
        return stepped


def step_direct(state: RotorState, kappa: float, params: ResonanceParams, kernel_tol: float = KERNEL_TOL) -> RotorState:
    return Propagator(params, DIRECT_CONVOLUTION, kernel_tol).step(state, kappa)


def step_split_spectral(
    state: RotorState, kappa: float, params: ResonanceParams, kernel_tol: float = KERNEL_TOL
) -> RotorState:
    return Propagator(params, SPLIT_SPECTRAL, kernel_tol).step(state, kappa)


def step(
    state: RotorState,
    kappa: float,
    params: ResonanceParams,
    method: str = SPLIT_SPECTRAL,
    kernel_tol: float = KERNEL_TOL,
) -> RotorState:
    return Propagator(params, method, kernel_tol).step(state, kappa)


def evolve(config: PropagatorConfig, record_steps: Iterable[int]) -> Tuple[MomentSeries, RotorState]:
    """
    Run the full kick sequence from the delta state, recording moments.

    Raises:
        ValueError: record_steps not sorted or outside [1, steps]
        NormDriftError: norm drift above NORM_DRIFT_ABORT
        GridLimitError: lattice growth past the hard cap
    """
    record = list(record_steps)
    if any(b <= a for a, b in zip(record, record[1:])):
        raise ValueError("record_steps must be strictly increasing")
    if record and (record[0] < 1 or record[-1] > config.steps):
        raise ValueError(f"record_steps must lie in [1, {config.steps}]")

    propagator = Propagator(config.resonance, config.method, config.kernel_tol, config.grid_policy)
    state = new_state_delta(config.initial_half_width())
    series = MomentSeries()
    wanted = set(record)
    reach = kick_kernel(max(abs(config.kappa1), abs(config.kappa2)), config.kernel_tol).half_width
    for kappa in config.sequence.kappas():
        state = maybe_expand_grid(state, config.grid_policy, reach)
        state = propagator.step(state, float(kappa))
        if state.norm_error > NORM_DRIFT_ABORT:
            raise NormDriftError(
                f"norm drift {state.norm_error:.3e} at step {state.step} exceeds {NORM_DRIFT_ABORT:.0e}",
                state.norm_error,
            )
        if state.step in wanted:
            series.append(state.step, state)
    series.end_norm_error = float(state.norm_error)
    return series, state


def overlap_with_delta(state: RotorState) -> float:
    """|<0|psi>|."""
    return abs(state.amplitude(0))


def commutator_norm(
    kappa1: float,
    kappa2: float,
    params: ResonanceParams,
    method: str = SPLIT_SPECTRAL,
    kernel_tol: float = KERNEL_TOL,
) -> float:
    """Largest per-site magnitude of [U(kappa1), U(kappa2)] applied to the delta state."""
    propagator = Propagator(params, method, kernel_tol)
    start = new_state_delta(4 * truncation_order(max(abs(kappa1), abs(kappa2)), kernel_tol) + 16)
    forward = propagator.step(propagator.step(start, kappa1), kappa2)
    backward = propagator.step(propagator.step(start, kappa2), kappa1)
    lo = min(forward.l_min, backward.l_min)
    hi = max(forward.l_max, backward.l_max)
    return float(np.max(np.abs(forward.window(lo, hi) - backward.window(lo, hi))))
