import numpy as np
import pytest

import sdebridge as sb
from sdebridge.errors import SingularDiffusionError
from sdebridge.qmle import (
    _hessian_fd_vec,
    _objective_vec,
    gradient_fd,
    gradient_fd_forward,
    repair_pd,
)

from helpers import make_ou_model


def _flat_path(values, delta):
    values = np.asarray(values, dtype=float)
    times = delta * np.arange(values.shape[0])
    return sb.SamplePath(times=times, values=values, delta=delta)


@pytest.fixture(scope="module")
def unit_model():
    # d = 1, constant diffusion beta, drift -alpha x; wide boxes for hand cases
    return make_ou_model(alpha_bounds=(-5, 5), beta_bounds=(0.05, 5.0))


def test_contrast_zero_increments(unit_model):
    # b = 0 (alpha = 0), Sigma = 1, increments all zero => contrast 0
    path = _flat_path(np.ones((3, 1)), 1.0)
    theta = sb.ParamVector([0.0], [1.0])
    assert sb.quasi_neg_loglik(unit_model, path, theta) == pytest.approx(0.0)


def test_contrast_single_increment(unit_model):
    # single increment of 2 at delta 1, unit diffusion: 0.5 (log 1 + 4) = 2
    path = _flat_path([[0.0], [2.0]], 1.0)
    theta = sb.ParamVector([0.0], [1.0])
    assert sb.quasi_neg_loglik(unit_model, path, theta) == pytest.approx(2.0)


def test_contrast_scaled_diffusion(unit_model):
    # Sigma = 4: 0.5 (log 4 + 4/4)
    path = _flat_path([[0.0], [2.0]], 1.0)
    theta = sb.ParamVector([0.0], [2.0])
    expected = 0.5 * np.log(4.0) + 0.5
    assert sb.quasi_neg_loglik(unit_model, path, theta) == pytest.approx(expected)


def test_contrast_left_endpoint_convention(linear3d):
    # coefficients must be evaluated at the left endpoint of each increment:
    # make sigma depend on the state so the two conventions disagree
    beta = np.zeros(12)
    beta[0], beta[1] = 1.0, 1.0          # sigma_1 = 1 + x_1
    beta[4], beta[8] = 1.0, 1.0
    theta = sb.ParamVector(np.zeros(12), beta)
    values = np.array([[0.0, 0, 0], [1.0, 0, 0], [1.0, 0, 0]])
    path = _flat_path(values, 1.0)
    # increment 1: sigma_1(x=0) = 1, contribution 0.5 (log 1 + 1)
    # increment 2: sigma_1(x=1) = 2, zero increment, 0.5 log 4
    expected = 0.5 * (np.log(1.0) + 1.0) + 0.5 * np.log(4.0)
    assert sb.quasi_neg_loglik(linear3d, path, theta) == pytest.approx(expected)


def test_contrast_singular_sigma_raises(unit_model):
    model = make_ou_model(beta_bounds=(0.0, 5.0))
    path = _flat_path([[0.0], [1.0]], 1.0)
    with pytest.raises(SingularDiffusionError):
        sb.quasi_neg_loglik(model, path, sb.ParamVector([0.0], [0.0]))


def test_gradient_two_implementations_agree(linear3d, linear3d_path):
    # perturbations keep sigma well away from zero along the path, where the
    # contrast is smooth and the two difference schemes must agree
    f = _objective_vec(linear3d, linear3d_path, linear3d.p1)
    rng = np.random.default_rng(31)
    theta0 = linear3d.reference_theta.concat()
    scale = np.concatenate([np.full(12, 0.2), np.full(12, 0.02)])
    for _ in range(20):
        t = theta0 + rng.uniform(-1.0, 1.0, size=theta0.size) * scale
        g1 = gradient_fd(f, t, rel_step=1e-6)
        g2 = gradient_fd_forward(f, t, rel_step=1e-8)
        denom = np.maximum(np.abs(g1), 1.0)
        assert np.max(np.abs(g1 - g2) / denom) < 1e-4


def test_hessian_exact_on_quadratic():
    rng = np.random.default_rng(4)
    M = rng.normal(size=(5, 5))
    M = M @ M.T + np.eye(5)

    def f(t):
        return float(t @ M @ t)

    bounds = np.tile([-10.0, 10.0], (5, 1))
    H, onesided = _hessian_fd_vec(f, rng.normal(size=5), bounds)
    assert not onesided
    assert np.max(np.abs(H - 2.0 * M)) < 1e-6 * np.linalg.norm(M)


def test_hessian_one_sided_at_bound():
    def f(t):
        return float(np.sum(t * t))

    bounds = np.array([[0.0, 2.0]])
    H, onesided = _hessian_fd_vec(f, np.array([0.0]), bounds)
    assert onesided
    assert H[0, 0] == pytest.approx(2.0, rel=1e-4)


def test_hessian_near_flat_path(unit_model):
    # single tiny increment: curvature finite and symmetric
    path = _flat_path([[1.0], [1.0]], 1.0)
    H = sb.hessian_fd(unit_model, path, sb.ParamVector([0.0], [1.0]))
    assert H.shape == (2, 2)
    assert np.allclose(H, H.T)


def test_repair_pd_flags_and_floors():
    H = np.diag([4.0, 1.0, -0.5])
    fixed, flagged = repair_pd(H)
    assert flagged
    w = np.linalg.eigvalsh(fixed)
    assert w.min() > 0
    ok, flagged2 = repair_pd(np.eye(3))
    assert not flagged2
    assert np.array_equal(ok, np.eye(3))


def test_qmle_ou_recovers_parameters(ou_model):
    # sqrt(n delta)-consistency for alpha, sqrt(n)-consistency for beta
    theta = sb.ParamVector([1.0], [1.0])
    n = 5000
    delta = sb.high_freq_grid(n)
    errs_a, errs_b = [], []
    for stream in range(3):
        path = sb.euler_simulate(ou_model, theta, np.ones(1), n, delta,
                                 sb.RngSpec(17, stream))
        fit = sb.qmle_fit(ou_model, path, init=sb.ParamVector([0.5], [0.5]),
                          method="lbfgsb")
        assert fit.converged
        errs_a.append(fit.theta_hat.alpha[0] - 1.0)
        errs_b.append(fit.theta_hat.beta[0] - 1.0)
    # generous 3-sigma style bands at these rates
    assert np.max(np.abs(errs_a)) < 3.0 * (n * delta) ** -0.5 * 3.0
    assert np.max(np.abs(errs_b)) < 3.0 * n ** -0.5 * 3.0


def test_qmle_zero_drift_null(unit_model):
    # data with zero drift and unit diffusion: alpha estimate near 0
    model = make_ou_model(alpha_bounds=(-5, 5))
    theta = sb.ParamVector([0.0], [1.0])
    path = sb.euler_simulate(model, theta, np.zeros(1), 4000,
                             sb.high_freq_grid(4000), sb.RngSpec(23, 0))
    fit = sb.qmle_fit(model, path, init=sb.ParamVector([1.0], [1.0]),
                      method="lbfgsb")
    n_delta = 4000 * sb.high_freq_grid(4000)
    assert abs(fit.theta_hat.alpha[0]) < 4.0 / np.sqrt(n_delta)


def test_qmle_near_noiseless_returns_truth(unit_model):
    # sigma tiny: contrast minimum pins the drift at the generating value
    model = make_ou_model(alpha_bounds=(-5, 5), beta_bounds=(1e-4, 5.0))
    theta = sb.ParamVector([1.3], [1e-3])
    path = sb.euler_simulate(model, theta, np.ones(1), 500, 0.01, sb.RngSpec(3, 0))
    fit = sb.qmle_fit(model, path, init=theta, method="lbfgsb")
    assert fit.theta_hat.alpha[0] == pytest.approx(1.3, abs=5e-3)


def test_simplex_objective_trace_monotone(ou_model):
    theta = sb.ParamVector([1.0], [1.0])
    path = sb.euler_simulate(ou_model, theta, np.ones(1), 800,
                             sb.high_freq_grid(800), sb.RngSpec(29, 0))
    fit = sb.qmle_fit(ou_model, path, init=sb.ParamVector([0.3], [0.4]),
                      method="simplex", record_trace=True)
    trace = np.asarray(fit.objective_trace)
    assert trace.size > 1
    assert np.all(np.diff(trace) <= 1e-9 * (1.0 + np.abs(trace[:-1])))


def test_rate_scaling_of_curvature(ou_model):
    # A_n Ghat A_n stays bounded across n (mixed-rates normalization)
    theta = sb.ParamVector([1.0], [1.0])
    maxima = {}
    for n in (500, 1000, 5000):
        delta = sb.high_freq_grid(n)
        path = sb.euler_simulate(ou_model, theta, np.ones(1), n, delta,
                                 sb.RngSpec(101, 0))
        fit = sb.qmle_fit(ou_model, path, init=sb.ParamVector([0.8], [0.9]),
                          method="lbfgsb")
        a = np.diag([(n * delta) ** -0.5, n ** -0.5])
        scaled = a @ fit.curvature @ a
        maxima[n] = np.abs(scaled).max()
    assert maxima[5000] < 5.0 * maxima[500]
    assert maxima[1000] < 5.0 * maxima[500]


def test_fit_result_within_bounds(linear3d, linear3d_path):
    fit = sb.qmle_fit(linear3d, linear3d_path, method="lbfgsb",
                      rng=sb.RngSpec(7, 63).generator())
    bounds = linear3d.bounds_concat()
    t = fit.theta_hat.concat()
    assert np.all(t >= bounds[:, 0] - 1e-12)
    assert np.all(t <= bounds[:, 1] + 1e-12)
    assert np.allclose(fit.curvature, fit.curvature.T)
