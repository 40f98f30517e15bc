"""Population and sample-level objects for two-class Gaussian LDA."""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy.special import ndtr

from .errors import (
    DegenerateRuleError,
    IllConditionedError,
    InsufficientDataError,
    InvalidInputError,
)
from .linalg import sym_sqrt

COND_LIMIT = 1e12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def std_normal_cdf(x):
    """Standard normal CDF; scalar in, float out; array in, array out."""
    out = ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """Two Gaussian classes N(mu0, sigma) and N(mu1, sigma) with equal priors."""

    mu0: np.ndarray
    mu1: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu0, mu1, sigma = _frozen(self.mu0), _frozen(self.mu1), _frozen(self.sigma)
        p = mu0.shape[0]
        if mu0.ndim != 1 or mu1.shape != (p,) or sigma.shape != (p, p):
            raise InvalidInputError(
                f"inconsistent shapes: mu0 {mu0.shape}, mu1 {mu1.shape}, sigma {sigma.shape}")
        scale = np.abs(sigma).max(initial=0.0)
        if np.abs(sigma - sigma.T).max(initial=0.0) > 1e-12 * scale:
            raise InvalidInputError("sigma is not symmetric")
        if np.linalg.eigvalsh(sigma)[0] <= 0:
            raise InvalidInputError("sigma is not positive definite")
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "mu1", mu1)
        object.__setattr__(self, "sigma", sigma)

    @property
    def p(self):
        return self.mu0.shape[0]

    @property
    def mu_d(self):
        return self.mu1 - self.mu0

    @property
    def mu_m(self):
        return (self.mu0 + self.mu1) / 2

    @cached_property
    def _bayes(self):
        return bayes_direction(self)

    @property
    def beta_star(self):
        return self._bayes[0]

    @property
    def delta(self):
        return self._bayes[1]

    def bayes_rule(self):
        return LinearRule(self.mu_m, self.beta_star)

    def bayes_risk(self):
        return std_normal_cdf(-self.delta / 2)


@dataclass(frozen=True, eq=False)
class SuffStats:
    mu_hat0: np.ndarray
    mu_hat1: np.ndarray
    sigma_hat: np.ndarray
    n0: int
    n1: int
    sigma_hat_sqrt: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("mu_hat0", "mu_hat1", "sigma_hat"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.sigma_hat_sqrt is None:
            object.__setattr__(self, "sigma_hat_sqrt", _frozen(sym_sqrt(self.sigma_hat)))
        else:
            object.__setattr__(self, "sigma_hat_sqrt", _frozen(self.sigma_hat_sqrt))

    @cached_property
    def sigma_hat_top_eig(self):
        return float(max(np.linalg.eigvalsh(self.sigma_hat)[-1], 0.0))

    @property
    def p(self):
        return self.mu_hat0.shape[0]

    @property
    def n(self):
        return min(self.n0, self.n1)

    @cached_property
    def mu_hat_d(self):
        return _frozen(self.mu_hat1 - self.mu_hat0)

    @cached_property
    def mu_hat_m(self):
        return _frozen((self.mu_hat0 + self.mu_hat1) / 2)

    @cached_property
    def sigma_hat_max(self):
        return float(np.sqrt(max(self.sigma_hat.diagonal().max(), 0.0)))

    @property
    def log_p_over_n(self):
        """sqrt(log p / n), the rate that scales every tuning parameter."""
        return float(np.sqrt(np.log(self.p) / self.n))


@dataclass(frozen=True, eq=False)
class LinearRule:
    """Predicts class 1 iff beta^T (z - alpha) > 0."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha, beta = _frozen(self.alpha), _frozen(self.beta)
        if alpha.shape != beta.shape or alpha.ndim != 1:
            raise InvalidInputError(f"alpha {alpha.shape} and beta {beta.shape} must be equal-length vectors")
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
            raise InvalidInputError("rule has non-finite entries")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    def scores(self, z):
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != self.beta.shape[0]:
            raise InvalidInputError(f"expected {self.beta.shape[0]} features, got {z.shape[-1]}")
        return (z - self.alpha) @ self.beta

    def predict(self, z):
        return (self.scores(z) > 0).astype(int)


def _check_samples(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2-D array, got shape {x.shape}")
    if x.shape[0] < 2:
        raise InsufficientDataError(f"{name} has {x.shape[0]} rows; at least 2 are required")
    return x


def pooled_scatter(class_samples):
    """Sum over classes of centered outer products, and the class means."""
    means = [x.mean(axis=0) for x in class_samples]
    scatter = sum((x - m).T @ (x - m) for x, m in zip(class_samples, means))
    return (scatter + scatter.T) / 2, means


def compute_suff_stats(samples0, samples1):
    """Class means and the pooled covariance with divisor n0 + n1."""
    x0 = _check_samples(samples0, "samples0")
    x1 = _check_samples(samples1, "samples1")
    if x0.shape[1] != x1.shape[1]:
        raise InvalidInputError(f"column mismatch: {x0.shape[1]} vs {x1.shape[1]}")
    scatter, (m0, m1) = pooled_scatter([x0, x1])
    return SuffStats(m0, m1, scatter / (len(x0) + len(x1)), len(x0), len(x1))


def bayes_direction(model):
    """Fisher direction Sigma^{-1}(mu1 - mu0) and the signal-noise ratio."""
    evals = np.linalg.eigvalsh(model.sigma)
    if evals[0] <= 0 or evals[-1] / evals[0] > COND_LIMIT:
        raise IllConditionedError(f"sigma condition number exceeds {COND_LIMIT:g}")
    beta = scipy.linalg.cho_solve(scipy.linalg.cho_factor(model.sigma), model.mu_d)
    beta = _frozen(beta)
    return beta, float(np.sqrt(max(beta @ model.sigma @ beta, 0.0)))


def classify(rule, z):
    return int(rule.predict(np.asarray(z, dtype=float)[None, :])[0])


def population_risk(rule, model):
    """Closed-form misclassification rate of a linear rule, equal priors."""
    beta = rule.beta
    if not np.any(beta):
        raise DegenerateRuleError("beta is zero; risk is undefined")
    spread = np.sqrt(beta @ model.sigma @ beta)
    r0 = std_normal_cdf(-(beta @ (rule.alpha - model.mu0)) / spread)
    r1 = std_normal_cdf(-(beta @ (model.mu1 - rule.alpha)) / spread)
    return 0.5 * r0 + 0.5 * r1
