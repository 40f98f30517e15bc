"""Synthetic two-class Gaussian models and seeded sampling.

Five covariance/direction recipes are provided. Class means are placed
symmetrically, mu0 = -Sigma beta*/2 and mu1 = +Sigma beta*/2, so the stated
beta* is exactly the Bayes direction and the midpoint is the origin.

Randomness comes from numpy's PCG64 seeded through SeedSequence. Replicate r
of an experiment with base seed S uses seed S + r.
"""
from dataclasses import asdict, dataclass
import enum

import numpy as np

from .core import GaussianModel
from .errors import ConstructionError, InvalidInputError
from .linalg import sym_sqrt

SPD_FLOOR = 1e-10


class ModelKind(str, enum.Enum):
    AR1 = "AR1"
    VARYING_DIAGONAL = "VaryingDiagonal"
    ERDOS_RENYI = "ErdosRenyi"
    BLOCK_SPARSE = "BlockSparse"
    APPROX_SPARSE = "ApproxSparse"


@dataclass(frozen=True)
class SimSpec:
    model: ModelKind = ModelKind.AR1
    p: int = 400
    s: int = 5
    eta_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "model", ModelKind(self.model))
        if self.p < 2:
            raise InvalidInputError(f"p must be at least 2, got {self.p}")
        if self.model != ModelKind.APPROX_SPARSE and not 1 <= self.s <= self.p:
            raise InvalidInputError(f"s must lie in [1, p], got s={self.s}, p={self.p}")
        if self.eta_scale <= 0:
            raise InvalidInputError("eta_scale must be positive")

    def to_dict(self):
        d = asdict(self)
        d["model"] = self.model.value
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in ("model", "p", "s", "eta_scale", "seed") if k in d})


def rng_for(seed):
    """PCG64 generator from an integer seed or a sequence of integers (a sub-stream key)."""
    if isinstance(seed, (list, tuple)):
        entropy = [int(k) for k in seed]
    else:
        entropy = int(seed)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def toeplitz_decay(p, rho=0.9):
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def _sparse_direction(p, s, value):
    beta = np.zeros(p)
    beta[:s] = value
    return beta


def _inverse_spd(omega):
    omega = (omega + omega.T) / 2
    sigma = np.linalg.inv(omega)
    return (sigma + sigma.T) / 2


def _ar1(spec, rng):
    return _inverse_spd(toeplitz_decay(spec.p)), _sparse_direction(spec.p, spec.s, 2 / np.sqrt(spec.s))


def _varying_diagonal(spec, rng):
    sigma = toeplitz_decay(spec.p)
    diag = 1.0 + rng.uniform(0.0, 1.0, size=spec.p)
    diag[:5] = 11.0
    np.fill_diagonal(sigma, diag)
    return sigma, _sparse_direction(spec.p, spec.s, 1 / np.sqrt(spec.s))


def _erdos_renyi(spec, rng):
    p = spec.p
    edges = rng.binomial(1, 0.2, size=(p, p))
    weights = rng.uniform(0.5, 1.0, size=(p, p)) * rng.choice([-1.0, 1.0], size=(p, p))
    omega_t = weights * edges
    omega_s = (omega_t + omega_t.T) / 2
    shift = max(-np.linalg.eigvalsh(omega_s)[0], 0.0) + 0.05
    omega0 = omega_s + shift * np.eye(p)
    d = 1 / np.sqrt(np.diag(omega0))
    omega = omega0 * d[:, None] * d[None, :]
    return _inverse_spd(omega), _sparse_direction(p, spec.s, 1 / np.sqrt(spec.s))


def _block_sparse(spec, rng):
    p = spec.p
    half = p // 2
    b = np.zeros((p, p))
    upper = np.triu(np.ones((p, p), dtype=bool), k=1)
    first = upper.copy()
    first[half:, :] = False
    b[first] = 10.0 * rng.binomial(1, 0.5, size=first.sum())
    second = upper.copy()
    second[:half, :] = False
    b[second] = 10.0
    b = b + b.T
    np.fill_diagonal(b, 1.0)
    w = max(-np.linalg.eigvalsh(b)[0], 0.0) + 0.05
    omega = (b + w * np.eye(p)) / (1 + w)
    return _inverse_spd(omega), _sparse_direction(p, spec.s, 1 / (2 * np.sqrt(spec.s)))


def _approx_sparse(spec, rng):
    return toeplitz_decay(spec.p), 0.75 ** np.arange(1, spec.p + 1)


_BUILDERS = {
    ModelKind.AR1: _ar1,
    ModelKind.VARYING_DIAGONAL: _varying_diagonal,
    ModelKind.ERDOS_RENYI: _erdos_renyi,
    ModelKind.BLOCK_SPARSE: _block_sparse,
    ModelKind.APPROX_SPARSE: _approx_sparse,
}


def build_covariance(spec):
    """Sigma and the unscaled direction for a spec, without means."""
    sigma, beta = _BUILDERS[spec.model](spec, rng_for(spec.seed))
    sigma = (sigma + sigma.T) / 2
    lam_min = np.linalg.eigvalsh(sigma)[0]
    if lam_min <= SPD_FLOOR:
        raise ConstructionError(
            f"{spec.model.value} covariance is not positive definite (lambda_min={lam_min:.3g})")
    return sigma, beta * spec.eta_scale


def build_model(spec):
    sigma, beta = build_covariance(spec)
    mu_d = sigma @ beta
    return GaussianModel(-mu_d / 2, mu_d / 2, sigma)


def _factor(sigma):
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        return sym_sqrt(sigma)


def sample(model, n0, n1, seed):
    """Draw n0 rows from class 0 and n1 rows from class 1."""
    if n0 < 1 or n1 < 1:
        raise InvalidInputError("n0 and n1 must be positive")
    rng = rng_for(seed)
    factor = _factor(model.sigma)
    z0 = rng.standard_normal((n0, model.p))
    z1 = rng.standard_normal((n1, model.p))
    return z0 @ factor.T + model.mu0, z1 @ factor.T + model.mu1


def sample_gaussian(mean, sigma, n, rng):
    """Rows of N(mean, sigma) drawn with a caller-owned generator."""
    z = rng.standard_normal((n, len(mean)))
    return z @ _factor(np.asarray(sigma)).T + mean
