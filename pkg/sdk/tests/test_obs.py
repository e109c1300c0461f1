"""Tests for moments, the spreading width and exponent fits."""
import math

import numpy as np
import pytest
from kickedrotor.analytic import primary_amplitudes
from kickedrotor.exceptions import FitError
from kickedrotor.obs import (
    MomentSeries,
    fit_exponent,
    fit_moment_exponent,
    fit_power_law,
    moment,
    record_schedule,
    sigma,
)
from kickedrotor.qkr import RotorState, new_state_delta


def _two_point(l: int) -> RotorState:
    amplitudes = np.zeros(2 * l + 1, dtype=complex)
    amplitudes[0] = amplitudes[-1] = 1 / math.sqrt(2)
    return RotorState(amplitudes=amplitudes, l_min=-l)


class TestMoments:
    """Tests for momentum moments."""

    def test_delta(self):
        for k in (2, 4, 6):
            assert moment(new_state_delta(5), k) == 0.0

    def test_bessel_state(self):
        """sum(l^2 J_l(5)^2) = 25 / 2."""
        state = RotorState(amplitudes=primary_amplitudes(-40, 40, 5.0), l_min=-40)
        assert moment(state, 2) == pytest.approx(12.5, abs=1e-10)
        assert sigma(state) == pytest.approx(math.sqrt(12.5), abs=1e-10)

    def test_two_point(self):
        state = _two_point(3)
        assert moment(state, 4) == pytest.approx(81.0)
        assert sigma(state) == pytest.approx(3.0)

    def test_rejects_odd_order(self):
        with pytest.raises(ValueError, match="moment order"):
            moment(new_state_delta(2), 3)


class TestSchedule:
    """Tests for log-spaced recording."""

    def test_shape(self):
        schedule = record_schedule(4181)
        assert schedule[0] == 1
        assert schedule[-1] == 4181
        assert all(b > a for a, b in zip(schedule, schedule[1:]))
        last_decade = [n for n in schedule if n >= 418.1]
        assert 50 <= len(last_decade) <= 70

    def test_empty(self):
        assert record_schedule(0) == []
        assert record_schedule(1) == [1]


class TestMomentSeries:
    """Tests for series accumulation."""

    def test_append_and_rows(self):
        series = MomentSeries()
        series.append(3, _two_point(3))
        assert len(series) == 1
        row = series.to_rows()[0]
        assert row["step"] == 3
        assert row["sigma"] == pytest.approx(3.0)
        assert row["energy"] == pytest.approx(9.0)
        assert row["m4"] == pytest.approx(81.0)
        assert row["m6"] == pytest.approx(729.0)
        assert list(row) == list(MomentSeries.COLUMNS)

    def test_final_drift(self):
        series = MomentSeries()
        assert series.final_drift == 0.0
        state = _two_point(3)
        state.norm_error = 2e-15
        series.append(3, state)
        assert series.final_drift == 2e-15
        series.end_norm_error = 5e-15
        assert series.final_drift == 5e-15
        assert series.norm_error == [2e-15]

    def test_moment_hierarchy(self):
        series = MomentSeries()
        state = RotorState(amplitudes=primary_amplitudes(-40, 40, 5.0), l_min=-40)
        series.append(1, state)
        assert series.m4[0] >= series.sigma[0] ** 4
        assert series.m6[0] >= series.m4[0] * series.sigma[0] ** 2


class TestFit:
    """Tests for power-law fits."""

    def _synthetic(self, c=0.7, amplitude=3.0, steps=4181):
        n = record_schedule(steps)
        series = MomentSeries(steps=n, sigma=[amplitude * x ** c for x in n])
        series.energy = [s ** 2 for s in series.sigma]
        series.m4 = [s ** 4 for s in series.sigma]
        series.m6 = [s ** 6 for s in series.sigma]
        return series

    def test_exact_power_law(self):
        fit = fit_exponent(self._synthetic())
        assert fit.c == pytest.approx(0.7, abs=1e-12)
        assert fit.log_amplitude == pytest.approx(math.log(3.0), abs=1e-10)
        assert fit.points_used >= 10
        assert fit.window == (419, 4181)
        assert fit.residual_rms < 1e-12

    def test_rescaling_invariance(self):
        a = fit_exponent(self._synthetic(amplitude=3.0))
        b = fit_exponent(self._synthetic(amplitude=300.0))
        assert abs(a.c - b.c) < 1e-12

    def test_moment_exponents(self):
        series = self._synthetic()
        assert fit_moment_exponent(series, 4).c == pytest.approx(0.7, abs=1e-10)
        assert fit_moment_exponent(series, 6).c == pytest.approx(0.7, abs=1e-10)

    def test_custom_window(self):
        fit = fit_exponent(self._synthetic(), window=(10, 100))
        assert fit.window == (10, 100)
        assert fit.c == pytest.approx(0.7, abs=1e-12)

    def test_too_few_points(self):
        with pytest.raises(FitError, match="points") as exc_info:
            fit_power_law([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
        assert exc_info.value.points == 5

    def test_zero_sigma(self):
        steps = list(range(1, 21))
        values = [float(n) for n in steps]
        values[-1] = 0.0
        with pytest.raises(FitError, match="non-positive"):
            fit_power_law(steps, values, window=(1, 20))

    def test_to_dict(self):
        data = fit_exponent(self._synthetic()).to_dict()
        assert set(data) == {"c", "log_amplitude", "n_lo", "n_hi", "residual_rms", "points_used"}
