"""
Classical standard map driven by the same two-strength schedules.

    P_{n+1} = P_n + K sin(theta_n)
    theta_{n+1} = theta_n + P_{n+1}  (mod 2 pi)

Ensembles start with theta uniform on [0, 2 pi) and P = 0. Particles are
split into partitions, each seeded from its own spawned SeedSequence and
reduced in partition order, so results do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Tuple

import numpy as np

from .config import DEFAULT_SEED
from .obs import ExponentFit, fit_power_law
from .seqgen import KickSequence

TWO_PI = 2.0 * math.pi
# Greene's threshold for the last KAM torus; only used to pick sub-critical strengths.
K_CRITICAL = 0.9716
DEFAULT_PARTICLES = 10_000
DEFAULT_PARTITIONS = 4


def _wrap(theta: float) -> float:
    wrapped = theta % TWO_PI
    return 0.0 if wrapped >= TWO_PI else wrapped


@dataclass(frozen=True)
class Particle:
    theta: float
    momentum: float


def standard_map_step(particle: Particle, K: float) -> Particle:
    momentum = particle.momentum + K * math.sin(particle.theta)
    return Particle(theta=_wrap(particle.theta + momentum), momentum=momentum)


def jacobian_determinant(theta: float, momentum: float, K: float, h: float = 1e-6) -> float:
    """Central-difference determinant of one unwrapped map step."""

    def image(t: float, p: float) -> Tuple[float, float]:
        p_new = p + K * math.sin(t)
        return t + p_new, p_new

    tp, pp = image(theta + h, momentum)
    tm, pm = image(theta - h, momentum)
    dt_dtheta, dp_dtheta = (tp - tm) / (2 * h), (pp - pm) / (2 * h)
    tp, pp = image(theta, momentum + h)
    tm, pm = image(theta, momentum - h)
    dt_dp, dp_dp = (tp - tm) / (2 * h), (pp - pm) / (2 * h)
    return dt_dtheta * dp_dp - dt_dp * dp_dtheta


@dataclass
class ClassicalEnsemble:
    theta: list
    momentum: list
    seed: int
    sequence: KickSequence

    @property
    def K1(self) -> float:
        return self.sequence.kappa1

    @property
    def K2(self) -> float:
        return self.sequence.kappa2

    @property
    def size(self) -> int:
        return sum(part.size for part in self.theta)

    @classmethod
    def create(
        cls,
        sequence: KickSequence,
        particles: int = DEFAULT_PARTICLES,
        seed: int = DEFAULT_SEED,
        partitions: int = DEFAULT_PARTITIONS,
    ) -> "ClassicalEnsemble":
        if particles < 1:
            raise ValueError(f"particles must be >= 1, got {particles}")
        partitions = max(1, min(partitions, particles))
        sizes = [len(chunk) for chunk in np.array_split(np.arange(particles), partitions)]
        children = np.random.SeedSequence(seed).spawn(partitions)
        theta = [np.random.default_rng(child).uniform(0.0, TWO_PI, size) for child, size in zip(children, sizes)]
        momentum = [np.zeros(size) for size in sizes]
        return cls(theta=theta, momentum=momentum, seed=seed, sequence=sequence)

    def particles(self) -> list[Particle]:
        return [
            Particle(float(t), float(p))
            for thetas, momenta in zip(self.theta, self.momentum)
            for t, p in zip(thetas, momenta)
        ]


@dataclass
class ClassicalSeries:
    steps: list = field(default_factory=list)
    mean_p2: list = field(default_factory=list)

    COLUMNS = ("step", "mean_p2", "rms_p")

    def to_rows(self) -> list[dict]:
        return [
            {"step": n, "mean_p2": value, "rms_p": math.sqrt(value)}
            for n, value in zip(self.steps, self.mean_p2)
        ]


def _evolve_partition(
    theta: np.ndarray, momentum: np.ndarray, kicks: np.ndarray, record: list[int]
) -> np.ndarray:
    theta = theta.copy()
    momentum = momentum.copy()
    sums = np.zeros(len(record))
    slot = 0
    for n, K in enumerate(kicks, 1):
        momentum += K * np.sin(theta)
        theta = np.mod(theta + momentum, TWO_PI)
        if slot < len(record) and n == record[slot]:
            sums[slot] = np.sum(momentum * momentum)
            slot += 1
    return sums


def ensemble_evolve(
    ensemble: ClassicalEnsemble,
    n_steps: int,
    record_steps: Iterable[int],
    workers: int = 1,
) -> ClassicalSeries:
    """<P^2> at the recorded steps; partitions may run on `workers` threads."""
    if ensemble.sequence.length < n_steps:
        raise ValueError(f"sequence has {ensemble.sequence.length} kicks, need {n_steps}")
    record = sorted(set(int(n) for n in record_steps))
    if record and (record[0] < 1 or record[-1] > n_steps):
        raise ValueError(f"record_steps must lie in [1, {n_steps}]")
    kicks = ensemble.sequence.kappas()[:n_steps]

    def run(index: int) -> np.ndarray:
        return _evolve_partition(ensemble.theta[index], ensemble.momentum[index], kicks, record)

    indices = range(len(ensemble.theta))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run, indices))
    else:
        partials = [run(i) for i in indices]

    total = np.zeros(len(record))
    for partial in partials:
        total += partial
    return ClassicalSeries(steps=record, mean_p2=[float(v) for v in total / ensemble.size])


def classical_exponent(series: ClassicalSeries, window: Optional[Tuple[float, float]] = None) -> ExponentFit:
    """Power-law exponent of sqrt(<P^2>)."""
    return fit_power_law(series.steps, np.sqrt(np.asarray(series.mean_p2, dtype=float)), window)
