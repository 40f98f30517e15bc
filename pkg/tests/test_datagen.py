import numpy as np
import pytest

from panda_lda.datagen import ModelKind, SimSpec, build_covariance, build_model, sample, toeplitz_decay
from panda_lda.errors import InvalidInputError


def test_ar1_p2_inverse():
    sigma, _ = build_covariance(SimSpec(ModelKind.AR1, p=2, s=1))
    expected = np.array([[1.0, -0.9], [-0.9, 1.0]]) / 0.19
    np.testing.assert_allclose(sigma, expected, rtol=1e-12)


def test_ar1_beta_norm():
    model = build_model(SimSpec(ModelKind.AR1, p=50, s=5))
    _, beta = build_covariance(SimSpec(ModelKind.AR1, p=50, s=5))
    assert abs(np.linalg.norm(beta) - 2.0) < 1e-12
    np.testing.assert_allclose(model.beta_star, beta, atol=1e-9)
    np.testing.assert_allclose(model.mu_m, 0.0, atol=1e-15)


def test_varying_diagonal_structure():
    for seed in range(5):
        sigma, beta = build_covariance(SimSpec(ModelKind.VARYING_DIAGONAL, p=10, s=5, seed=seed))
        d = np.diag(sigma)
        assert np.all(d[:5] == 11.0)
        assert np.all((d[5:] >= 1) & (d[5:] <= 2))
        np.testing.assert_array_equal(sigma, sigma.T)
        assert abs(beta[0] - 1 / np.sqrt(5)) < 1e-15


def test_block_sparse_and_er_support():
    for kind in (ModelKind.ERDOS_RENYI, ModelKind.BLOCK_SPARSE):
        _, beta = build_covariance(SimSpec(kind, p=30, s=4, seed=1))
        assert set(np.flatnonzero(beta)) == {0, 1, 2, 3}
    _, beta = build_covariance(SimSpec(ModelKind.BLOCK_SPARSE, p=30, s=4))
    assert abs(beta[0] - 1 / (2 * np.sqrt(4))) < 1e-15


def test_approx_sparse_norm_closed_form():
    p = 200
    _, beta = build_covariance(SimSpec(ModelKind.APPROX_SPARSE, p=p))
    r = 0.75 ** 2
    closed = np.sqrt(r * (1 - r ** p) / (1 - r))
    assert abs(np.linalg.norm(beta) - closed) < 1e-10
    # the l1 norm, sum of 0.75^j over j >= 1, tends to 3
    assert abs(np.abs(beta).sum() - 3.0) < 1e-10


def test_eta_scale():
    _, b1 = build_covariance(SimSpec(ModelKind.AR1, p=20, s=5))
    _, b2 = build_covariance(SimSpec(ModelKind.AR1, p=20, s=5, eta_scale=2.0))
    np.testing.assert_allclose(b2, 2 * b1)


def test_spec_validation():
    with pytest.raises(InvalidInputError):
        SimSpec(ModelKind.AR1, p=1)
    with pytest.raises(InvalidInputError):
        SimSpec(ModelKind.AR1, p=5, s=6)
    with pytest.raises(ValueError):
        SimSpec("Nope", p=5)
    spec = SimSpec("ErdosRenyi", p=7, s=2, seed=3)
    assert SimSpec.from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("kind", list(ModelKind))
def test_generators_spd_across_seeds(kind):
    for seed in range(50):
        sigma, _ = build_covariance(SimSpec(kind, p=12, s=3, seed=seed))
        np.testing.assert_array_equal(sigma, sigma.T)
        assert np.linalg.eigvalsh(sigma)[0] > 0


def test_build_deterministic():
    a = build_model(SimSpec(ModelKind.ERDOS_RENYI, p=15, s=3, seed=4))
    b = build_model(SimSpec(ModelKind.ERDOS_RENYI, p=15, s=3, seed=4))
    np.testing.assert_array_equal(a.sigma, b.sigma)


def test_sample_moments():
    from panda_lda.core import GaussianModel

    model = GaussianModel(np.zeros(5), np.zeros(5), np.eye(5))
    x0, x1 = sample(model, 100_000, 10, seed=1)
    assert np.abs(x0.mean(0)).max() < 0.02
    ar = build_model(SimSpec(ModelKind.AR1, p=5, s=2))
    z0, _ = sample(ar, 100_000, 1, seed=2)
    cov = np.cov(z0.T)
    assert np.linalg.norm(cov - ar.sigma) / np.linalg.norm(ar.sigma) < 0.05


def test_sample_seeding():
    model = build_model(SimSpec(ModelKind.AR1, p=4, s=2))
    a = sample(model, 5, 5, seed=7)
    b = sample(model, 5, 5, seed=7)
    c = sample(model, 5, 5, seed=8)
    np.testing.assert_array_equal(a[0], b[0])
    assert not np.array_equal(a[0], c[0])
    d = sample(model, 5, 5, seed=[7, 1])
    assert not np.array_equal(a[0], d[0])
    with pytest.raises(InvalidInputError):
        sample(model, 0, 5, seed=1)


def test_toeplitz():
    np.testing.assert_allclose(toeplitz_decay(3), [[1, 0.9, 0.81], [0.9, 1, 0.9], [0.81, 0.9, 1]])
