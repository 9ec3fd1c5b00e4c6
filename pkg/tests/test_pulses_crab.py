from __future__ import annotations

import json
import math

import numpy as np
import pytest

from atomion_dw.control.crab import CrabSettings, crab_optimize
from atomion_dw.control.pulses import BaselineRamp, ControlPulse, crab_frequencies
from atomion_dw.core.errors import ConfigError, DomainError, OptimizationError


@pytest.fixture
def ramp() -> BaselineRamp:
    return BaselineRamp(d_start=4.0, d_hold=2.5, d_end=4.0, total_time=10.0, ramp_time=3.0)


def _midpoint_objective(target: float):
    def objective(pulse: ControlPulse) -> float:
        return float((pulse(0.5 * pulse.total_time) - target) ** 2)

    return objective


def test_baseline_ramp_shape(ramp):
    assert float(ramp(0.0)) == pytest.approx(4.0)
    assert float(ramp(5.0)) == pytest.approx(2.5)
    assert float(ramp(10.0)) == pytest.approx(4.0)
    # 램프 끝에서 기울기 0
    eps = 1e-6
    assert (float(ramp(3.0)) - float(ramp(3.0 - eps))) / eps == pytest.approx(0.0, abs=1e-4)


def test_ramp_time_must_fit(ramp):
    with pytest.raises(DomainError):
        BaselineRamp(4.0, 2.5, 4.0, total_time=10.0, ramp_time=6.0)
    with pytest.raises(DomainError):
        BaselineRamp(4.0, -1.0, 4.0, total_time=10.0, ramp_time=3.0)


def test_correction_vanishes_at_endpoints(ramp):
    pulse = ControlPulse.from_baseline(ramp, 3).with_coefficients(
        [0.3, -0.2, 0.1, 0.05, 0.4, -0.3], [0.1, -0.2, 0.3]
    )
    assert float(pulse(0.0)) == pytest.approx(4.0, abs=1e-12)
    assert float(pulse(10.0)) == pytest.approx(4.0, abs=1e-12)
    assert float(pulse(5.0)) != pytest.approx(2.5)


def test_crab_frequencies():
    np.testing.assert_allclose(
        crab_frequencies(2.0, np.zeros(3)), math.pi * np.array([1.0, 2.0, 3.0])
    )
    np.testing.assert_allclose(crab_frequencies(2.0, np.array([0.5])), [1.5 * math.pi])


def test_randomization_limits(ramp):
    pulse = ControlPulse.from_baseline(ramp, 2)
    with pytest.raises(DomainError):
        pulse.with_coefficients(np.zeros(4), np.array([0.6, 0.0]))
    with pytest.raises(DomainError):
        pulse.with_coefficients(np.zeros(3))


def test_floor_violation(ramp):
    assert ControlPulse.from_baseline(ramp, 1, d_floor=2.0).floor_violation() == 0.0
    flat = ControlPulse.from_baseline(BaselineRamp.constant(2.5, 10.0), 1, d_floor=2.0)
    # t = T/2 에서 cos 항이 -1
    deep = flat.with_coefficients([0.0, 1.0])
    assert deep.min_separation() == pytest.approx(1.5, abs=1e-9)
    assert deep.floor_violation() == pytest.approx(0.5, abs=1e-9)


def test_pulse_file_round_trip(tmp_path, ramp):
    pulse = ControlPulse.from_baseline(ramp, 2, seed=5).with_coefficients(
        [0.1, 0.2, -0.1, 0.0], [0.25, -0.1]
    )
    path = pulse.save(tmp_path / "pulse.json")
    loaded = ControlPulse.load(path)
    ts = np.linspace(0.0, 10.0, 11)
    np.testing.assert_allclose(loaded(ts), pulse(ts))
    assert loaded.seed == 5
    assert json.loads(path.read_text())["total_time"] == 10.0


def test_bad_pulse_files(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        ControlPulse.load(broken)
    partial = tmp_path / "partial.json"
    partial.write_text(json.dumps({"total_time": 1.0}))
    with pytest.raises(ConfigError):
        ControlPulse.load(partial)
    with pytest.raises(ConfigError):
        ControlPulse.load(tmp_path / "missing.json")


def test_crab_improves_on_baseline(ramp):
    settings = CrabSettings(n_harmonics=2, max_evals=201, n_starts=2, seed=3, d_floor=1.0)
    result = crab_optimize(_midpoint_objective(2.3), ControlPulse.from_baseline(ramp), settings)
    assert result.baseline_objective == pytest.approx(0.04)
    assert result.objective <= result.baseline_objective
    assert result.objective < 1e-3
    assert result.n_evals <= settings.max_evals
    assert result.trace_start[0] == -1
    assert np.all(np.diff(result.best_so_far) <= 0.0)
    frame = result.trace_frame()
    assert list(frame.columns) == ["eval_index", "start", "objective", "best_so_far"]


def test_crab_trace_is_reproducible(ramp):
    settings = CrabSettings(n_harmonics=2, max_evals=61, n_starts=3, seed=9, d_floor=1.0)
    objective = _midpoint_objective(2.2)
    template = ControlPulse.from_baseline(ramp)
    one = crab_optimize(objective, template, settings, threads=1)
    two = crab_optimize(objective, template, settings, threads=3)
    np.testing.assert_array_equal(one.trace_values, two.trace_values)
    np.testing.assert_array_equal(one.pulse.randomization, two.pulse.randomization)


def test_crab_respects_budget(ramp):
    settings = CrabSettings(n_harmonics=3, max_evals=21, n_starts=2, seed=1, d_floor=1.0)
    result = crab_optimize(_midpoint_objective(2.0), ControlPulse.from_baseline(ramp), settings)
    assert result.n_evals <= 21
    assert np.count_nonzero(result.trace_start == 0) <= settings.evals_per_start


def test_crab_fails_when_floor_is_unreachable():
    low = BaselineRamp.constant(1.0, 5.0)
    settings = CrabSettings(n_harmonics=1, max_evals=11, n_starts=1, seed=0, d_floor=1.5)
    with pytest.raises(OptimizationError):
        crab_optimize(_midpoint_objective(1.0), ControlPulse.from_baseline(low), settings)


def test_crab_settings_validation():
    with pytest.raises(DomainError):
        CrabSettings(n_starts=5, max_evals=5)
    with pytest.raises(DomainError):
        CrabSettings(n_harmonics=0)
