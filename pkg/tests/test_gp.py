from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cablegp.assign import CableTrace
from cablegp.errors import SingularKernel, TooFewPoints
from cablegp.frame import DetectedPoint, SurveyConfig
from cablegp.gp import (fit_cable, gp_fit, gp_predict, gp_predict_many, kernel, kernel_matrix,
                        sample_grid)

from oracles import gauss_jordan_inverse, oracle_predict


def trace_of(xs, ys, zs):
    return CableTrace(1, tuple(DetectedPoint(x, y, z) for x, y, z in zip(xs, ys, zs)))


def test_kernel_examples():
    assert kernel(3.0, 3.0, True, 1.0, 0.3) == pytest.approx(1.09, abs=1e-15)
    assert kernel(0.0, 1.0, False, 1.0, 0.7) == pytest.approx(0.606531, abs=1e-6)
    assert kernel(0.0, 2.0, False, 1.0, 0.0) == pytest.approx(0.135335, abs=1e-6)


def test_one_by_one_system():
    model = gp_fit([0.0], [2.0], 1.0, 0.3)
    assert model.alpha[0] == pytest.approx(2 / 1.09, rel=1e-14)
    pred = gp_predict(model, 0.0)
    assert pred.mean == pytest.approx(1.834862, abs=1e-6)
    assert pred.stddev ** 2 == pytest.approx(1 - 1 / 1.09, abs=1e-12)


def test_duplicates_without_noise_are_singular():
    with pytest.raises(SingularKernel):
        gp_fit([1.0, 1.0], [0.0, 1.0], 1.0, 0.0)


def test_noise_free_interpolation():
    xs = np.array([0.0, 1.3, 2.0, 4.5, 7.0])
    ys = np.array([0.2, -1.0, 0.5, 2.0, 1.0])
    model = gp_fit(xs, ys, 1.0, 0.0)
    mean, std = gp_predict_many(model, xs)
    np.testing.assert_allclose(mean, ys, atol=1e-8)
    assert np.all(std <= 1e-6)


def test_far_from_data_reverts_to_prior():
    model = gp_fit([0.0, 1.0, 2.0], [3.0, 4.0, 5.0], 1.0, 0.3)
    pred = gp_predict(model, 2.0 + 10.0)
    assert abs(pred.mean) <= 1e-8
    assert pred.stddev ** 2 == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=1, max_size=50), st.floats(0.3, 3))
def test_cholesky_succeeds_with_noise(xs, beta):
    model = gp_fit(xs, np.zeros(len(xs)), beta, 0.1)
    K = kernel_matrix(xs, beta, 0.1)
    assert np.array_equal(K, K.T)
    assert np.all(np.diag(model.chol_factor) > 0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=6, unique=True),
       st.floats(0.5, 2.0), st.floats(0.05, 1.0), st.floats(-6, 6), st.integers(0, 2**31))
def test_matches_gauss_jordan_oracle(xs, beta, theta, x_star, seed):
    ys = list(np.random.default_rng(seed).normal(0, 1, len(xs)))
    pred = gp_predict(gp_fit(xs, ys, beta, theta), x_star)
    mean, var = oracle_predict(xs, ys, beta, theta, x_star)
    assert pred.mean == pytest.approx(mean, abs=1e-10)
    assert pred.stddev ** 2 == pytest.approx(max(var, 0.0), abs=1e-10)


def test_gauss_jordan_oracle_is_exact_on_rational_matrix():
    mat = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]]
    inv = gauss_jordan_inverse(mat)
    assert inv[0][0] == pytest.approx(0.6) and inv[0][1] == pytest.approx(-0.2)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=15), st.floats(-12, 12), st.floats(0.01, 1.0))
def test_adding_a_point_never_increases_variance(xs, x_star, theta):
    small = gp_fit(xs[:-1], np.zeros(len(xs) - 1), 1.0, theta)
    big = gp_fit(xs, np.zeros(len(xs)), 1.0, theta)
    assert gp_predict(big, x_star).stddev ** 2 <= gp_predict(small, x_star).stddev ** 2 + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=20), st.integers(0, 2**31))
def test_mean_linear_in_targets(xs, seed):
    ys = np.random.default_rng(seed).normal(0, 3, len(xs))
    grid = np.linspace(-12, 12, 25)
    m1, s1 = gp_predict_many(gp_fit(xs, ys, 1.0, 0.3), grid)
    m2, s2 = gp_predict_many(gp_fit(xs, 2 * ys, 1.0, 0.3), grid)
    np.testing.assert_allclose(m2, 2 * m1, rtol=1e-12, atol=1e-12)
    np.testing.assert_array_equal(s1, s2)


def test_positive_semidefinite_pivots_without_noise():
    rng = np.random.default_rng(5)
    for _ in range(50):
        xs = np.sort(rng.uniform(0, 30, rng.integers(1, 12)))
        xs = xs[np.concatenate([[True], np.diff(xs) > 0.5])]
        eig = np.linalg.eigvalsh(kernel_matrix(xs, 1.0, 0.0))
        assert eig.min() >= -1e-12


def test_fit_cable_constant_trace_exact():
    trace = trace_of(np.arange(0.0, 12.0, 2.0), [3.0] * 6, [0.5] * 6)
    cfg = SurveyConfig(theta_y=0.0, theta_z=0.0)
    rec = fit_cable(trace, cfg)
    at_lines = np.isin(np.round(rec.x, 9), np.arange(0.0, 12.0, 2.0))
    np.testing.assert_allclose(rec.mean_y[at_lines], 3.0, atol=1e-8)
    assert rec.x[0] == 0.0 and rec.x[-1] == 10.0


def test_y_and_z_are_fitted_independently():
    rng = np.random.default_rng(1)
    xs = np.arange(0.0, 20.0, 2.0)
    ys, zs = rng.normal(5, 0.3, 10), rng.normal(0.5, 0.05, 10)
    a = fit_cable(trace_of(xs, ys, zs), SurveyConfig())
    b = fit_cable(trace_of(xs, ys, rng.permutation(zs)), SurveyConfig())
    assert np.array_equal(a.mean_y, b.mean_y)
    assert np.array_equal(a.halfwidth_y, b.halfwidth_y)


def test_halfwidth_is_two_sigma():
    xs = np.arange(0.0, 10.0, 2.0)
    trace = trace_of(xs, np.zeros(5), np.full(5, 0.5))
    cfg = SurveyConfig()
    rec = fit_cable(trace, cfg)
    model = gp_fit(xs, np.zeros(5), cfg.beta_y, cfg.theta_y)
    _, std = gp_predict_many(model, rec.x)
    np.testing.assert_allclose(rec.halfwidth_y, 2 * std, rtol=1e-12)


def test_fit_cable_needs_two_points():
    with pytest.raises(TooFewPoints):
        fit_cable(trace_of([0.0], [1.0], [0.5]), SurveyConfig())


def test_sample_grid_includes_endpoints():
    g = sample_grid(0.0, 1.0, 0.3)
    assert g[0] == 0.0 and g[-1] == 1.0
    np.testing.assert_allclose(g, [0.0, 0.3, 0.6, 0.9, 1.0])
    np.testing.assert_allclose(sample_grid(0.0, 1.0, 0.25), [0, 0.25, 0.5, 0.75, 1.0])
