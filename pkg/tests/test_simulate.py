import io

import numpy as np
import pytest

import sdebridge as sb
from sdebridge.errors import ExplosionError

from helpers import make_ou_model


def test_high_freq_grid_values():
    assert sb.high_freq_grid(1000) == pytest.approx(0.1, abs=1e-15)
    assert sb.high_freq_grid(1) == 1.0
    assert sb.high_freq_grid(10 ** 6) == pytest.approx(0.01, abs=1e-15)
    with pytest.raises(ValueError):
        sb.high_freq_grid(0)


def test_normal_block_determinism():
    a = sb.standard_normal_block(sb.RngSpec(7, 3), 1000)
    b = sb.standard_normal_block(sb.RngSpec(7, 3), 1000)
    assert np.array_equal(a, b)
    c = sb.standard_normal_block(sb.RngSpec(7, 4), 1000)
    assert not np.array_equal(a, c)


def test_normal_block_moments():
    z = sb.standard_normal_block(sb.RngSpec(123, 0), 10 ** 5)
    n = z.size
    assert abs(z.mean()) < 4.0 / np.sqrt(n)          # 4 sigma band
    assert abs(z.var() - 1.0) < 4.0 * np.sqrt(2.0 / n)


def test_zero_coefficients_give_constant_path(ou_model):
    model = make_ou_model(alpha_bounds=(-5, 5), beta_bounds=(-5, 5))
    theta = sb.ParamVector([0.0], [0.0])
    path = sb.euler_simulate(model, theta, np.array([1.0]), 50, 0.1, sb.RngSpec(0, 0))
    assert np.allclose(path.values, 1.0)


def test_deterministic_decay_step(ou_model):
    # dX = -X dt with no noise: one Euler step from 1 at delta 0.1 gives 0.9
    model = make_ou_model(beta_bounds=(0.0, 5.0))
    theta = sb.ParamVector([1.0], [0.0])
    path = sb.euler_simulate(model, theta, np.array([1.0]), 1, 0.1, sb.RngSpec(0, 0))
    assert path.values[1, 0] == pytest.approx(0.9, abs=1e-15)


def test_ou_stationary_variance(ou_model):
    theta = sb.ParamVector([1.0], [1.0])
    path = sb.euler_simulate(ou_model, theta, np.zeros(1), 10 ** 5, 0.01,
                             sb.RngSpec(99, 0))
    v = path.values[:, 0].var()
    assert 0.45 <= v <= 0.55  # stationary variance 1/(2 theta) = 0.5


def test_one_step_conditional_mean(ou_model):
    # the Euler step reproduces the transition mean 1 - theta*delta + O(delta^2)
    theta = sb.ParamVector([1.0], [1.0])
    delta = 0.01
    reps = 10 ** 4
    finals = np.empty(reps)
    for k in range(reps):
        p = sb.euler_simulate(ou_model, theta, np.ones(1), 1, delta, sb.RngSpec(5, k))
        finals[k] = p.values[1, 0]
    se = delta ** 0.5 / np.sqrt(reps)
    assert abs(finals.mean() - (1.0 - delta)) < 3.0 * se + delta ** 2


def test_reproducibility_and_stream_change(linear3d):
    theta = linear3d.reference_theta
    a = sb.euler_simulate(linear3d, theta, np.ones(3), 100, 0.05, sb.RngSpec(1, 0))
    b = sb.euler_simulate(linear3d, theta, np.ones(3), 100, 0.05, sb.RngSpec(1, 0))
    c = sb.euler_simulate(linear3d, theta, np.ones(3), 100, 0.05, sb.RngSpec(1, 1))
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_explosion_raises_with_step_index(ou_model):
    model = make_ou_model(alpha_bounds=(-50, 50))
    theta = sb.ParamVector([-30.0], [0.1])  # explosive drift
    with pytest.raises(ExplosionError) as exc:
        sb.euler_simulate(model, theta, np.array([1.0]), 200, 0.5,
                          sb.RngSpec(3, 0), explosion_bound=1e6)
    assert exc.value.step >= 0


def test_refine_keeps_observation_grid(ou_model):
    theta = sb.ParamVector([1.0], [1.0])
    p1 = sb.euler_simulate(ou_model, theta, np.ones(1), 50, 0.1, sb.RngSpec(11, 0),
                           refine=4)
    assert p1.n == 50
    assert p1.delta == 0.1
    assert np.allclose(np.diff(p1.times), 0.1)


def test_sample_path_validation():
    with pytest.raises(ValueError):
        sb.SamplePath(times=[0.0, 0.1, 0.25], values=np.zeros((3, 1)), delta=0.1)
    with pytest.raises(ValueError):
        sb.SamplePath(times=[0.0, 0.1], values=np.array([[0.0], [np.inf]]), delta=0.1)


def test_csv_round_trip_precision(linear3d, tmp_path):
    theta = linear3d.reference_theta
    path = sb.euler_simulate(linear3d, theta, np.ones(3), 64, 0.05, sb.RngSpec(8, 2))
    buf = io.StringIO()
    sb.write_path_csv(path, buf, meta={"seed": 8})
    buf.seek(0)
    reloaded = sb.load_series_csv(buf, delta=0.05)
    assert np.array_equal(reloaded.values, path.values)
    assert np.array_equal(reloaded.times, path.times)
