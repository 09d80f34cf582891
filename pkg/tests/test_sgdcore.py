import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from effsgd.graphs import degree_distribution, graph_g2
from effsgd.sequences import minibatch_weight
from effsgd.sgdcore import (AdamState, ModelError, NesterovState, StepSchedule, adam_step,
                            make_logistic_ridge, make_quadratic_scalar, make_sum_nonconvex,
                            nasgd_step, sgd_step, solve_theta_star, stochastic_grad,
                            synthetic_logistic_data)


@pytest.mark.parametrize("b, theta", [([3.0, 3.0, 3.0], 3.0), ([0.0, 2.0], 1.0), ([4, 3, 2, 4, 3], 16 / 5)])
def test_quadratic_optimum(b, theta):
    m = make_quadratic_scalar(b)
    th, H = solve_theta_star(m)
    assert abs(th[0] - theta) < 1e-15 and H[0, 0] == 1.0
    assert abs(m.full_grad(th)[0]) < 1e-12


def test_logistic_zero_features():
    m = make_logistic_ridge(np.zeros((4, 3)), np.array([1, -1, 1, 1]))
    np.testing.assert_allclose(m.theta_star, 0, atol=1e-12)
    np.testing.assert_allclose(m.hessian, np.eye(3), atol=1e-12)


def test_logistic_scalar_bisection_oracle():
    m = make_logistic_ridge(np.array([[1.0]]), np.array([1.0]))
    root = brentq(lambda t: t * (1 + np.exp(t)) - 1, 0, 1, xtol=1e-15)
    assert abs(m.theta_star[0] - root) < 1e-9
    assert abs(root - 0.401058) < 1e-6
    assert np.linalg.norm(m.full_grad(m.theta_star)) < 1e-10


def test_logistic_synthetic_shape():
    X, y = synthetic_logistic_data(62, seed=1)
    assert X.shape == (62, 108)
    np.testing.assert_allclose(np.linalg.norm(X, axis=1), 1)
    m = make_logistic_ridge(X, y)
    assert np.linalg.eigvalsh(m.hessian)[0] >= 1 - 1e-12
    assert np.linalg.norm(m.full_grad(m.theta_star)) < 1e-10


def test_logistic_gradient_matches_finite_differences():
    X, y = synthetic_logistic_data(6, p=4, seed=2)
    m = make_logistic_ridge(X, y)
    th = np.random.default_rng(0).normal(size=4)
    for i in range(6):
        fd = np.array([(m.value(th + 1e-6 * e, i) - m.value(th - 1e-6 * e, i)) / 2e-6 for e in np.eye(4)])
        np.testing.assert_allclose(m.grads(th[None], np.array([i]))[0], fd, atol=1e-7)


def test_logistic_rejects_bad_labels():
    with pytest.raises(ModelError):
        make_logistic_ridge(np.zeros((2, 2)), np.array([0, 1]))


def test_sum_nonconvex_structure():
    m = make_sum_nonconvex(20, seed=3)
    assert np.abs(m.D.sum(axis=0)).max() == 0.0
    assert m.indefinite_components().size >= 1
    np.testing.assert_allclose(m.hessian, 2 * m.a.T @ m.a / m.n)
    assert np.linalg.norm(m.full_grad(m.theta_star)) < 1e-10
    th = np.random.default_rng(0).normal(size=10)
    agg = th @ (m.a.T @ m.a) @ th / m.n + m.b @ th
    assert abs(m.f(th) - agg) < 1e-10


def test_sum_nonconvex_requires_even_n():
    with pytest.raises(ModelError):
        make_sum_nonconvex(7)


def test_schedule():
    s = StepSchedule("poly", 0.9)
    assert s(1) == 1.0 and abs(s(1000) - 1000 ** -0.9) < 1e-18
    assert StepSchedule("constant", gamma=0.1)(5) == 0.1
    for bad in (dict(kind="poly", alpha=0.5), dict(kind="constant"), dict(kind="other")):
        with pytest.raises(ModelError):
            StepSchedule(**bad)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_reweighted_gradient_unbiased(seed):
    g = graph_g2()
    pi = degree_distribution(g)
    rng = np.random.default_rng(seed)
    m = make_sum_nonconvex(10, seed=seed)
    m5 = make_quadratic_scalar(rng.normal(size=5))
    th = rng.normal(size=(1, 1))
    w = 1 / (5 * pi)
    Gs = np.array([stochastic_grad(m5, th, np.array([i]), w)[0] for i in range(5)])
    assert abs(pi @ Gs[:, 0] - m5.full_grad(th[0])[0]) < 1e-12
    th10 = rng.normal(size=(1, 10))
    pi10 = rng.dirichlet(np.ones(10))
    G10 = np.array([stochastic_grad(m, th10, np.array([i]), 1 / (10 * pi10))[0] for i in range(10)])
    np.testing.assert_allclose(pi10 @ G10, m.full_grad(th10[0]), atol=1e-12)


def test_srw_reweighting_factor():
    g = graph_g2()
    pi = degree_distribution(g)
    m = make_quadratic_scalar(g.degrees)
    th = np.array([[0.5]])
    for i in range(5):
        raw = m.grads(th, np.array([i]))[0, 0]
        got = stochastic_grad(m, th, np.array([i]), 1 / (5 * pi))[0, 0]
        assert abs(got - 16 / (5 * g.degrees[i]) * raw) < 1e-14


@pytest.mark.parametrize("n", range(2, 9))
def test_minibatch_gradient_unbiased(n):
    m = make_sum_nonconvex(8, p=3, seed=n)
    th = np.random.default_rng(n).normal(size=(1, 3))
    full = m.grad_table(th[0])
    table = full[:n]
    for S in range(1, n + 1):
        batches = list(itertools.combinations(range(n), S))
        est = np.mean([table.T @ minibatch_weight(B, n) for B in batches], axis=0)
        np.testing.assert_allclose(est, table.mean(axis=0), atol=1e-12)
    # the update-rule path agrees with the weight-vector path
    for S in range(1, 9):
        B = np.arange(S)[None, :]
        np.testing.assert_allclose(stochastic_grad(m, th, B)[0],
                                   full.T @ minibatch_weight(B[0], 8), atol=1e-12)


def test_projection_idempotent():
    m = make_quadratic_scalar([0.0, 2.0])
    x = np.array([[-50.0], [3.0], [50.0]])
    p = m.project(x)
    np.testing.assert_array_equal(m.project(p), p)
    np.testing.assert_array_equal(p[:, 0], [-9.0, 3.0, 11.0])


def test_sgd_constant_b_closed_form():
    c, th0 = 2.5, 0.0
    m = make_quadratic_scalar([c] * 4)
    s = StepSchedule("poly", 0.7)
    th = np.array([[th0]])
    prod = 1.0
    rng = np.random.default_rng(0)
    prev = abs(th0 - c)
    for t in range(2, 60):
        th = sgd_step(th, rng.integers(0, 4, size=1), s(t), m)
        prod *= 1 - s(t)
        assert abs(th[0, 0] - (c + (th0 - c) * prod)) < 1e-12
        assert abs(th[0, 0] - c) <= prev
        prev = abs(th[0, 0] - c)


def test_nasgd_beta_zero_is_sgd():
    m = make_sum_nonconvex(6, p=3, seed=1)
    rng = np.random.default_rng(0)
    th = rng.normal(size=(4, 3))
    st_ = NesterovState.start(th)
    for t in range(1, 30):
        x = rng.integers(0, 6, size=4)
        th = sgd_step(th, x, 0.05, m)
        st_ = nasgd_step(st_, x, 0.05, m, beta=0.0)
        np.testing.assert_array_equal(st_.theta, th)


def test_nasgd_and_adam_converge_on_constant_b():
    m = make_quadratic_scalar([1.5] * 3)
    s = StepSchedule("poly", 0.9)
    ns, ad = NesterovState.start(np.zeros((1, 1))), AdamState.start(np.zeros((1, 1)))
    for t in range(1, 3000):
        x = np.array([t % 3])
        ns = nasgd_step(ns, x, s(t), m)
        ad = adam_step(ad, x, s(t), m)
    assert abs(ns.theta[0, 0] - 1.5) < 1e-6
    assert abs(ad.theta[0, 0] - 1.5) < 0.05


def test_adam_moments():
    m = make_quadratic_scalar([0.0])
    st_ = AdamState.start(np.array([[4.0]]))
    st1 = adam_step(st_, np.array([0]), 0.01, m)
    assert abs(st1.m[0, 0] - 0.1 * 4.0) < 1e-15 and abs(st1.v[0, 0] - 0.001 * 16.0) < 1e-15
    # bias-corrected step is gamma * g / (|g| + eps)
    assert abs(st1.theta[0, 0] - (4.0 - 0.01 * 4.0 / (4.0 + 1e-8))) < 1e-12


def test_adam_zero_gradient_keeps_theta():
    m = make_quadratic_scalar([1.0, 1.0])
    st_ = adam_step(AdamState.start(np.array([[1.0]])), np.array([0]), 0.5, m)
    assert st_.theta[0, 0] == 1.0
