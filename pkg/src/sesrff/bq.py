"""Bayesian quadrature weights for a fixed set of Gaussian-kernel frequencies."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.spatial.distance import cdist

from .exceptions import SingularPriorError
from .spectral import BQ, FeatureWeights

SIGMA_GP_GRID = tuple(2.0**k for k in range(-8, 9, 2))
MAX_JITTER = 1e-2


@dataclass(frozen=True)
class BQConfig:
    sigma_gp: float = 1.0
    jitter: float = 1e-8

    def __post_init__(self):
        if not self.sigma_gp > 0:
            raise ValueError(f"sigma_gp must be positive, got {self.sigma_gp}")
        if not self.jitter >= 0:
            raise ValueError(f"jitter must be non-negative, got {self.jitter}")


def _gp_kernel(freqs, sigma_gp):
    sq = cdist(freqs.freqs, freqs.freqs, "sqeuclidean")
    return np.exp(-sq / (2.0 * sigma_gp**2))


def gp_covariance(freqs, config):
    """Prior covariance of the integrand at the frequencies, plus jitter."""
    K = _gp_kernel(freqs, config.sigma_gp)
    K[np.diag_indices_from(K)] += config.jitter
    return K


def bq_gamma(freqs, config, kernel):
    """Integral of the GP covariance against the kernel's spectral measure.

    For ``P = N(0, s^2 I)`` with ``s = 1/sigma`` the Gaussian convolution gives

        gamma_m = (g^2 / (g^2 + s^2))^(d/2) * exp(-||w_m||^2 / (2 (g^2 + s^2)))

    where ``g = sigma_gp``.
    """
    g2 = config.sigma_gp**2
    s2 = kernel.sigma**-2
    d = freqs.dim
    sq = np.sum(freqs.freqs**2, axis=1)
    return (g2 / (g2 + s2)) ** (d / 2.0) * np.exp(-sq / (2.0 * (g2 + s2)))


def bq_weights(freqs, config, kernel):
    """Posterior-mean quadrature weights ``K_GP^-1 gamma``.

    The covariance is Cholesky-factored; on failure the jitter is raised ten-fold
    until it reaches 1e-2, after which :class:`SingularPriorError` is raised.
    """
    K = _gp_kernel(freqs, config.sigma_gp)
    gamma = bq_gamma(freqs, config, kernel)
    jitter = config.jitter
    while True:
        try:
            factor = cho_factor(K + jitter * np.eye(len(K)), lower=True)
            beta = cho_solve(factor, gamma)
            if np.all(np.isfinite(beta)):
                break
        except LinAlgError:
            pass
        jitter = jitter * 10.0 if jitter > 0 else 1e-10
        if jitter > MAX_JITTER:
            raise SingularPriorError(
                f"GP covariance not positive definite even with jitter {MAX_JITTER}"
            )
    return FeatureWeights(
        beta,
        lam=jitter,
        kind=BQ,
        clamped=False,
        scale=1.0,
        info={"sigma_gp": config.sigma_gp, "jitter": jitter},
    )


def tune_sigma_gp(X, pairs, freqs, kernel, grid=SIGMA_GP_GRID, jitter=1e-8):
    """Pick one global ``sigma_gp`` minimising squared kernel error on ``pairs``.

    Returns the fitted weights for the chosen value and a ``{sigma_gp: error}``
    table; grid values whose prior cannot be factored score ``inf``. Ties go to
    the larger bandwidth (the smoother prior).
    """
    from .ses import pair_design, pair_targets

    design = pair_design(X, pairs, freqs)
    targets = pair_targets(X, pairs, kernel)
    M = freqs.n_components
    table = {}
    best = None
    for g in sorted(set(float(v) for v in grid)):
        try:
            w = bq_weights(freqs, BQConfig(g, jitter), kernel)
        except SingularPriorError:
            table[g] = np.inf
            continue
        # design columns carry 1/M; kernel weights are in absolute units
        err = float(np.mean((targets - design @ (M * w.kernel_weights)) ** 2))
        table[g] = err
        if best is None or err <= best[1]:
            best = (w, err)
    if best is None:
        raise SingularPriorError("no sigma_gp in the grid gave a usable prior")
    return best[0], table
