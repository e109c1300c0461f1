"""Tests for the classical standard map."""
import math
import os

import numpy as np
import pytest
from kickedrotor.classical import (
    TWO_PI,
    ClassicalEnsemble,
    ClassicalSeries,
    Particle,
    classical_exponent,
    ensemble_evolve,
    jacobian_determinant,
    standard_map_step,
)
from kickedrotor.exceptions import FitError
from kickedrotor.obs import record_schedule
from kickedrotor.seqgen import SequenceSpec, build_sequence


def _slow() -> None:
    if os.getenv("QKR_SLOW_TESTS") != "1":
        pytest.skip("Set QKR_SLOW_TESTS=1 to run long acceptance runs.")


class TestStandardMap:
    """Tests for a single map step."""

    def test_zero_angle(self):
        moved = standard_map_step(Particle(0.0, 7.0), 0.9)
        assert moved.momentum == 7.0
        assert moved.theta == pytest.approx(7.0 - TWO_PI)

    def test_fixed_point(self):
        moved = standard_map_step(Particle(math.pi, 0.0), 2.0)
        assert moved.theta == pytest.approx(math.pi)
        assert moved.momentum == pytest.approx(0.0, abs=1e-15)

    def test_free_rotation(self):
        moved = standard_map_step(Particle(1.0, 0.5), 0.0)
        assert moved == Particle(1.5, 0.5)

    def test_theta_stays_in_range(self):
        particle = Particle(0.1, -3.0)
        for _ in range(100):
            particle = standard_map_step(particle, 1.7)
            assert 0.0 <= particle.theta < TWO_PI

    def test_area_preserving(self):
        rng = np.random.default_rng(1)
        for theta, momentum in zip(rng.uniform(0, TWO_PI, 20), rng.uniform(-5, 5, 20)):
            assert abs(jacobian_determinant(theta, momentum, 0.8) - 1.0) < 1e-8


class TestEnsemble:
    """Tests for ensemble evolution."""

    def _ensemble(self, k1=0.5, k2=0.8, steps=200, particles=2000, kind="fibonacci", seed=11):
        sequence = build_sequence(SequenceSpec(kind), k1, k2, steps)
        return ClassicalEnsemble.create(sequence, particles, seed=seed, partitions=4)

    def test_create(self):
        ensemble = self._ensemble()
        assert ensemble.size == 2000
        assert len(ensemble.particles()) == 2000
        assert (ensemble.K1, ensemble.K2) == (0.5, 0.8)
        assert all(0.0 <= p.theta < TWO_PI and p.momentum == 0.0 for p in ensemble.particles())

    def test_reproducible_from_seed(self):
        a, b = self._ensemble(seed=5), self._ensemble(seed=5)
        np.testing.assert_array_equal(np.concatenate(a.theta), np.concatenate(b.theta))

    def test_worker_count_does_not_change_result(self):
        ensemble = self._ensemble()
        record = record_schedule(200)
        serial = ensemble_evolve(ensemble, 200, record, workers=1)
        threaded = ensemble_evolve(ensemble, 200, record, workers=3)
        assert serial.mean_p2 == threaded.mean_p2

    def test_no_kick_keeps_momentum(self):
        series = ensemble_evolve(self._ensemble(0.0, 0.0), 50, [1, 10, 50])
        assert series.mean_p2 == [0.0, 0.0, 0.0]

    def test_first_kick(self):
        """<P^2> after one kick is K^2 <sin^2 theta> = K^2 / 2."""
        ensemble = self._ensemble(0.8, 0.8, particles=20000, kind="periodic")
        series = ensemble_evolve(ensemble, 1, [1])
        assert series.mean_p2[0] == pytest.approx(0.32, rel=0.05)

    def test_rows(self):
        series = ClassicalSeries(steps=[1, 2], mean_p2=[4.0, 9.0])
        assert series.to_rows() == [
            {"step": 1, "mean_p2": 4.0, "rms_p": 2.0},
            {"step": 2, "mean_p2": 9.0, "rms_p": 3.0},
        ]

    def test_zero_spread_fit_rejected(self):
        series = ensemble_evolve(self._ensemble(0.0, 0.0), 200, record_schedule(200))
        with pytest.raises(FitError):
            classical_exponent(series)

    def test_rejects_short_sequence(self):
        with pytest.raises(ValueError, match="kicks"):
            ensemble_evolve(self._ensemble(steps=10), 20, [20])

    def test_rejects_record_outside_run(self):
        with pytest.raises(ValueError, match="record_steps"):
            ensemble_evolve(self._ensemble(), 100, [150])

    def test_rejects_empty_ensemble(self):
        sequence = build_sequence(SequenceSpec(), 0.5, 0.8, 10)
        with pytest.raises(ValueError, match="particles"):
            ClassicalEnsemble.create(sequence, 0)


class TestAcceptance:
    """Long runs; enable with QKR_SLOW_TESTS=1."""

    def test_periodic_confinement(self):
        _slow()
        sequence = build_sequence(SequenceSpec("periodic", pattern="A"), 0.5, 0.5, 10_000)
        ensemble = ClassicalEnsemble.create(sequence, 10_000)
        record = record_schedule(10_000)
        series = ensemble_evolve(ensemble, 10_000, record, workers=4)
        at_100 = series.mean_p2[series.steps.index(100)]
        assert max(series.mean_p2) < 10 * at_100

    def test_fibonacci_breaks_confinement(self):
        """<P^2> grows past 100x the periodic run with a log-log slope in [0.7, 1.3]."""
        _slow()
        record = record_schedule(10_000)
        periodic = build_sequence(SequenceSpec("periodic", pattern="A"), 0.5, 0.5, 10_000)
        fibonacci = build_sequence(SequenceSpec("fibonacci"), 0.5, 0.8, 10_000)
        confined = ensemble_evolve(ClassicalEnsemble.create(periodic, 10_000), 10_000, record, workers=4)
        spread = ensemble_evolve(ClassicalEnsemble.create(fibonacci, 10_000), 10_000, record, workers=4)
        assert spread.mean_p2[-1] > 100 * confined.mean_p2[-1]
        assert 0.7 <= 2.0 * classical_exponent(spread).c <= 1.3
