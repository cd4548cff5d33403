"""Scikit-learn transformer for (data-driven) random Fourier features."""

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from .bq import SIGMA_GP_GRID, tune_sigma_gp
from .exceptions import UnsupportedMethodError
from .kernels import GaussianKernel, kernel_estimate
from .qmc import sample_qmc_frequencies
from .ses import LAMBDA_GRID, clamp_for_embedding, sample_train_val_pairs, tune_lambda
from .spectral import (
    BQ,
    MONTE_CARLO,
    QUASI_MONTE_CARLO,
    SES,
    UNIFORM,
    UNIFORM_SHRINKAGE,
    sample_mc_frequencies,
    uniform_weights,
    weighted_feature_map,
)


def draw_frequencies(sampler, n_components, dim, sigma, seed):
    if sampler == MONTE_CARLO:
        return sample_mc_frequencies(n_components, dim, sigma, seed)
    if sampler == QUASI_MONTE_CARLO:
        return sample_qmc_frequencies(n_components, dim, sigma, seed)
    raise UnsupportedMethodError(f"unknown sampler {sampler!r}")


class RandomFourierFeatures(TransformerMixin, BaseEstimator):
    """Random Fourier features for the Gaussian kernel with optional weighting.

    Parameters
    ----------
    n_components : int, default=64
        Number of frequencies M; the output has ``2 * M`` columns.
    sigma : float, default=1.0
        Gaussian kernel bandwidth.
    sampler : {"qmc", "mc"}, default="qmc"
        Scrambled/shifted Halton frequencies or i.i.d. Gaussian draws.
    weighting : {"uniform", "bq", "ses", "ses-uniform"}, default="uniform"
        How frequencies are weighted. ``"ses"`` fits one ridge weight per
        frequency on sampled data pairs, ``"ses-uniform"`` a single shared
        shrinkage weight, ``"bq"`` uses Bayesian quadrature weights with a
        globally tuned GP bandwidth.
    lambda_grid : sequence of float, optional
        Ridge coefficients tried for the SES weightings.
    sigma_gp_grid : sequence of float, optional
        GP bandwidths tried for ``"bq"``.
    n_train_pairs, n_val_pairs : int, optional
        Pair budgets; default ``4 * M`` and ``2 * M``.
    sketch_r : int, optional
        Expected number of norm-sampled training rows.
    random_state : int, default=0

    Attributes
    ----------
    frequencies_ : SpectralFrequencies
    raw_weights_ : FeatureWeights
        Fitted weights, possibly with negative entries.
    weights_ : FeatureWeights
        Clamped weights used by :meth:`transform`.
    lambda_ : float or None
    sigma_gp_ : float or None
    tuning_errors_ : dict
        Validation error per tried hyperparameter (empty for uniform weights).
    n_features_in_ : int
    """

    def __init__(self, n_components=64, sigma=1.0, sampler="qmc", weighting="uniform",
                 lambda_grid=None, sigma_gp_grid=None, n_train_pairs=None,
                 n_val_pairs=None, sketch_r=None, random_state=0):
        self.n_components = n_components
        self.sigma = sigma
        self.sampler = sampler
        self.weighting = weighting
        self.lambda_grid = lambda_grid
        self.sigma_gp_grid = sigma_gp_grid
        self.n_train_pairs = n_train_pairs
        self.n_val_pairs = n_val_pairs
        self.sketch_r = sketch_r
        self.random_state = random_state

    def fit(self, X, y=None):
        X = validate_data(self, X, dtype=float)
        if self.n_components < 1:
            raise ValueError("n_components must be positive")
        if self.weighting != UNIFORM and X.shape[0] < 2:
            raise ValueError(f"n_samples={X.shape[0]} is too few to sample kernel pairs")
        M = self.n_components
        seed = int(self.random_state)
        kernel = GaussianKernel(self.sigma)
        self.frequencies_ = draw_frequencies(self.sampler, M, X.shape[1], self.sigma, seed)
        self.lambda_ = None
        self.sigma_gp_ = None
        self.tuning_errors_ = {}
        pair_seed = [seed, 1]
        n_train = self.n_train_pairs or 4 * M
        n_val = self.n_val_pairs or 2 * M

        if self.weighting == UNIFORM:
            raw = uniform_weights(M)
        elif self.weighting in (SES, UNIFORM_SHRINKAGE):
            search = tune_lambda(
                X, self.frequencies_, kernel,
                grid=self.lambda_grid or LAMBDA_GRID,
                train_pairs=n_train, val_pairs=n_val, seed=pair_seed,
                sketch_r=self.sketch_r, uniform=self.weighting == UNIFORM_SHRINKAGE,
            )
            raw = search.weights
            self.lambda_ = search.lam
            self.tuning_errors_ = search.errors
        elif self.weighting == BQ:
            pairs, _ = sample_train_val_pairs(len(X), n_train, 0, pair_seed)
            raw, table = tune_sigma_gp(X, pairs, self.frequencies_, kernel,
                                       grid=self.sigma_gp_grid or SIGMA_GP_GRID)
            self.sigma_gp_ = raw.info["sigma_gp"]
            self.tuning_errors_ = table
        else:
            raise UnsupportedMethodError(f"unknown weighting {self.weighting!r}")
        self.raw_weights_ = raw
        self.weights_ = clamp_for_embedding(raw)
        return self

    def transform(self, X):
        check_is_fitted(self, "weights_")
        X = validate_data(self, X, dtype=float, reset=False)
        return weighted_feature_map(X, self.frequencies_, self.weights_).values

    def approximate_kernel(self, X, Y=None):
        """Approximate Gram matrix using the raw (unclamped) weights."""
        check_is_fitted(self, "raw_weights_")
        X = check_array(X, dtype=float)
        Y = X if Y is None else check_array(Y, dtype=float)
        return kernel_estimate(X, Y, self.frequencies_, self.raw_weights_).values
