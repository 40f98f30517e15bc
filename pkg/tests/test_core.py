import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from panda_lda.core import (
    GaussianModel,
    LinearRule,
    SuffStats,
    bayes_direction,
    classify,
    compute_suff_stats,
    population_risk,
    std_normal_cdf,
)
from panda_lda.errors import DegenerateRuleError, IllConditionedError, InsufficientDataError, InvalidInputError
from panda_lda.linalg import sym_sqrt


def random_spd(rng, p):
    a = rng.standard_normal((p, p))
    return a @ a.T / p + 0.3 * np.eye(p)


def random_model(rng, p):
    sigma = random_spd(rng, p)
    mu0 = rng.standard_normal(p)
    return GaussianModel(mu0, mu0 + rng.standard_normal(p), sigma)


def test_normal_cdf_values():
    assert std_normal_cdf(0.0) == 0.5
    assert isinstance(std_normal_cdf(0.3), float)
    # erfc identity as an independent check
    for x in (-3.0, -1.0, 0.5, 2.5):
        assert abs(std_normal_cdf(x) - 0.5 * math.erfc(-x / math.sqrt(2))) < 1e-15
    np.testing.assert_allclose(std_normal_cdf(np.array([-1.0, 1.0])).sum(), 1.0, atol=1e-15)


def test_model_validation():
    with pytest.raises(InvalidInputError):
        GaussianModel([0, 0], [1, 1], [[1, 0.5], [0.4, 1]])
    with pytest.raises(InvalidInputError):
        GaussianModel([0, 0], [1, 1], [[1, 2], [2, 1]])
    with pytest.raises(InvalidInputError):
        GaussianModel([0, 0], [1, 1, 1], np.eye(2))


def test_bayes_direction_identity():
    model = GaussianModel([0.0, 0.0], [1.0, 2.0], np.eye(2))
    beta, delta = bayes_direction(model)
    np.testing.assert_allclose(beta, [1.0, 2.0])
    assert abs(delta - math.sqrt(5)) < 1e-14
    assert abs(model.bayes_risk() - std_normal_cdf(-math.sqrt(5) / 2)) < 1e-15


def test_bayes_direction_ill_conditioned():
    with pytest.raises(IllConditionedError):
        bayes_direction(GaussianModel([0.0, 0.0], [1.0, 1.0], np.diag([1.0, 1e-13])))


def test_population_risk_matches_bayes_risk():
    rng = np.random.default_rng(3)
    for p in (2, 5, 9):
        model = random_model(rng, p)
        assert abs(population_risk(model.bayes_rule(), model) - model.bayes_risk()) < 1e-12


def test_population_risk_zero_direction():
    model = GaussianModel([0.0], [1.0], [[1.0]])
    with pytest.raises(DegenerateRuleError):
        population_risk(LinearRule([0.0], [0.0]), model)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-3, 1e3))
def test_risk_scale_invariance(seed, scale):
    rng = np.random.default_rng(seed)
    model = random_model(rng, 4)
    rule = LinearRule(rng.standard_normal(4), rng.standard_normal(4))
    scaled = LinearRule(rule.alpha, scale * rule.beta)
    assert abs(population_risk(rule, model) - population_risk(scaled, model)) <= 1e-12


def test_bayes_dominates_perturbations():
    rng = np.random.default_rng(11)
    model = random_model(rng, 6)
    best = model.bayes_risk()
    rule = model.bayes_rule()
    for _ in range(100):
        other = LinearRule(rule.alpha + 0.3 * rng.standard_normal(6), rule.beta + 0.3 * rng.standard_normal(6))
        assert population_risk(other, model) >= best - 1e-12


def test_suff_stats_hand_example():
    x0 = np.array([[0.0, 0.0], [2.0, 0.0]])
    x1 = np.array([[1.0, 1.0], [1.0, 3.0]])
    stats = compute_suff_stats(x0, x1)
    np.testing.assert_allclose(stats.mu_hat0, [1.0, 0.0])
    np.testing.assert_allclose(stats.mu_hat1, [1.0, 2.0])
    # scatter: class 0 gives diag(2, 0), class 1 gives diag(0, 2); divisor 4
    np.testing.assert_allclose(stats.sigma_hat, np.diag([0.5, 0.5]))
    assert abs(stats.sigma_hat_max - math.sqrt(0.5)) < 1e-15
    np.testing.assert_allclose(stats.mu_hat_d, [0.0, 2.0])
    np.testing.assert_allclose(stats.mu_hat_m, [1.0, 1.0])
    assert stats.n == 2 and stats.p == 2


def test_suff_stats_errors():
    with pytest.raises(InsufficientDataError):
        compute_suff_stats(np.zeros((1, 2)), np.zeros((3, 2)))
    with pytest.raises(InvalidInputError):
        compute_suff_stats(np.zeros((3, 2)), np.zeros((3, 3)))


def test_suff_stats_sqrt_and_frozen():
    rng = np.random.default_rng(0)
    stats = compute_suff_stats(rng.standard_normal((8, 5)), rng.standard_normal((9, 5)))
    np.testing.assert_allclose(stats.sigma_hat_sqrt @ stats.sigma_hat_sqrt, stats.sigma_hat, atol=1e-12)
    with pytest.raises(ValueError):
        stats.sigma_hat[0, 0] = 1.0


def test_log_rate():
    stats = SuffStats(np.zeros(400), np.ones(400), np.eye(400), 200, 300)
    assert abs(stats.log_p_over_n - math.sqrt(math.log(400) / 200)) < 1e-15


def test_classify_threshold():
    rule = LinearRule([0.0, 0.0], [1.0, -1.0])
    assert classify(rule, np.array([2.0, 1.0])) == 1
    assert classify(rule, np.array([1.0, 1.0])) == 0  # score exactly 0 goes to class 0
    np.testing.assert_array_equal(rule.predict(np.array([[1.0, 0.0], [0.0, 1.0]])), [1, 0])


def test_sym_sqrt():
    np.testing.assert_allclose(sym_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-15)
    np.testing.assert_allclose(sym_sqrt(np.eye(3)), np.eye(3), atol=1e-15)
    rng = np.random.default_rng(1)
    a = rng.standard_normal((10, 10))
    m = a @ a.T
    r = sym_sqrt(m)
    assert np.linalg.norm(r @ r - m) / np.linalg.norm(m) < 1e-10
    with pytest.raises(InvalidInputError):
        sym_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))
