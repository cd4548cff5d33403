import numpy as np
import pytest

from oracles import gamma_quadrature

from sesrff import bq as bq_module
from sesrff.bq import BQConfig, bq_gamma, bq_weights, gp_covariance, tune_sigma_gp
from sesrff.exceptions import SingularPriorError
from sesrff.kernels import GaussianKernel
from sesrff.spectral import BQ, SpectralFrequencies, sample_mc_frequencies


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("sigma", [0.5, 2.0])
@pytest.mark.parametrize("sigma_gp", [0.5, 1.0, 2.0])
def test_gamma_against_quadrature(d, sigma, sigma_gp):
    freqs = sample_mc_frequencies(3, d, sigma, seed=11)
    got = bq_gamma(freqs, BQConfig(sigma_gp), GaussianKernel(sigma))
    for m in range(3):
        assert got[m] == pytest.approx(gamma_quadrature(freqs.freqs[m], sigma, sigma_gp), abs=1e-6, rel=1e-6)


def test_gamma_at_origin():
    freqs = SpectralFrequencies(np.zeros((1, 3)), sigma=1.0)
    got = bq_gamma(freqs, BQConfig(1.0), GaussianKernel(1.0))
    assert got[0] == pytest.approx(0.5**1.5, rel=1e-14)


def test_covariance_is_symmetric_with_jitter():
    freqs = sample_mc_frequencies(6, 2, 1.0, 0)
    K = gp_covariance(freqs, BQConfig(0.7, 1e-3))
    np.testing.assert_allclose(K, K.T)
    np.testing.assert_allclose(np.diag(K), 1.001)


def test_weights_solve_linear_system():
    freqs = sample_mc_frequencies(10, 3, 1.0, 5)
    cfg = BQConfig(0.5, 1e-8)
    kernel = GaussianKernel(1.0)
    w = bq_weights(freqs, cfg, kernel)
    expected = np.linalg.solve(gp_covariance(freqs, cfg), bq_gamma(freqs, cfg, kernel))
    np.testing.assert_allclose(w.beta, expected, rtol=1e-8)
    assert w.kind == BQ and w.scale == 1.0 and not w.clamped
    assert w.info["sigma_gp"] == 0.5


def test_weights_sum_near_one_for_wide_prior():
    # a very smooth prior makes every integrand nearly constant, whose integral is 1
    freqs = sample_mc_frequencies(20, 2, 1.0, 0)
    w = bq_weights(freqs, BQConfig(50.0, 1e-10), GaussianKernel(1.0))
    assert w.total == pytest.approx(1.0, abs=0.05)


def test_duplicate_frequencies_need_jitter():
    f = np.repeat(np.array([[0.3, -0.2]]), 3, axis=0)
    freqs = SpectralFrequencies(f, sigma=1.0)
    w = bq_weights(freqs, BQConfig(1.0, 0.0), GaussianKernel(1.0))
    assert np.isfinite(w.beta).all()
    assert w.info["jitter"] > 0
    # the three identical nodes share the integral of one
    gamma = bq_gamma(freqs, BQConfig(1.0), GaussianKernel(1.0))[0]
    assert w.total == pytest.approx(gamma, rel=1e-6)


def test_singular_prior_raises(monkeypatch):
    calls = []

    def always_fail(a, lower=False):
        calls.append(a[0, 0] - 1.0)
        raise bq_module.LinAlgError("not positive definite")

    monkeypatch.setattr(bq_module, "cho_factor", always_fail)
    freqs = sample_mc_frequencies(3, 2, 1.0, 0)
    with pytest.raises(SingularPriorError):
        bq_weights(freqs, BQConfig(1.0, 1e-8), GaussianKernel(1.0))
    # jitter escalated ten-fold from 1e-8 up to the 1e-2 cap
    np.testing.assert_allclose(calls, [1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2], rtol=1e-6)


def test_config_validation():
    with pytest.raises(ValueError):
        BQConfig(0.0)
    with pytest.raises(ValueError):
        BQConfig(1.0, -1.0)


def test_tune_sigma_gp_picks_grid_minimum():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((40, 3))
    kernel = GaussianKernel(1.2)
    freqs = sample_mc_frequencies(16, 3, 1.2, 1)
    pairs = np.column_stack((rng.integers(0, 40, 60), rng.integers(0, 40, 60)))
    grid = (0.25, 1.0, 4.0)
    w, table = tune_sigma_gp(X, pairs, freqs, kernel, grid)
    assert set(table) == set(grid)
    assert w.info["sigma_gp"] == min(table, key=lambda g: (table[g], -g))
    diff = X[pairs[:, 0]] - X[pairs[:, 1]]
    direct = np.cos(diff @ freqs.freqs.T) @ w.kernel_weights
    err = np.mean((kernel(X[pairs[:, 0]], X[pairs[:, 1]]) - direct) ** 2)
    assert err == pytest.approx(table[w.info["sigma_gp"]], rel=1e-10)
