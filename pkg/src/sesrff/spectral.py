"""Spectral frequencies, feature weights and random Fourier feature maps.

Conventions
-----------
A frequency ``w`` contributes the pair ``(cos(w.x), sin(w.x))``; the plain
feature map scales every pair by ``1/sqrt(M)`` so that

    z(x) . z(x') = (1/M) sum_m cos(w_m . (x - x'))

which is an unbiased estimate of the Gaussian kernel with k(0) = 1.

Weights are stored as ``beta`` together with a ``scale``; the kernel estimate
they induce is ``sum_m scale * beta_m * cos(w_m . (x - x'))``. Least-squares
weights use ``scale = 1/M`` (uniform baseline ``beta = 1``) while quadrature
weights use ``scale = 1`` (uniform baseline ``beta = 1/M``).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ContractViolationError, DimensionMismatchError

MONTE_CARLO = "mc"
QUASI_MONTE_CARLO = "qmc"

UNIFORM = "uniform"
BQ = "bq"
SES = "ses"
UNIFORM_SHRINKAGE = "ses-uniform"
WEIGHT_KINDS = (UNIFORM, BQ, SES, UNIFORM_SHRINKAGE)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpectralFrequencies:
    """M frequency vectors (rows of ``freqs``) drawn for bandwidth ``sigma``."""

    freqs: np.ndarray
    sigma: float
    source: str = MONTE_CARLO
    seed: int = 0

    def __post_init__(self):
        w = _frozen(self.freqs)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise ValueError("freqs must be a non-empty M x d array")
        if not np.all(np.isfinite(w)):
            raise ValueError("freqs must be finite")
        if self.source not in (MONTE_CARLO, QUASI_MONTE_CARLO):
            raise ValueError(f"unknown frequency source {self.source!r}")
        object.__setattr__(self, "freqs", w)

    @property
    def n_components(self):
        return self.freqs.shape[0]

    @property
    def dim(self):
        return self.freqs.shape[1]


@dataclass(frozen=True)
class FeatureMatrix:
    """n x 2M block of features, columns interleaved as (cos, sin) per frequency."""

    values: np.ndarray
    norm_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_components(self):
        return self.values.shape[1] // 2


@dataclass(frozen=True)
class FeatureWeights:
    """Per-frequency weights together with how they were obtained."""

    beta: np.ndarray
    lam: float = 0.0
    kind: str = UNIFORM
    clamped: bool = False
    scale: float = 1.0
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        b = _frozen(self.beta)
        if b.ndim != 1:
            raise ValueError("beta must be a vector")
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.clamped and np.any(b < 0):
            raise ContractViolationError("clamped weights must be non-negative")
        object.__setattr__(self, "beta", b)

    def __len__(self):
        return self.beta.shape[0]

    @property
    def kernel_weights(self):
        """Coefficients of ``cos(w_m . (x - x'))`` in the kernel estimate."""
        return self.scale * self.beta

    @property
    def total(self):
        """Sum of kernel weights; 1 for the uniform estimator."""
        return float(self.kernel_weights.sum())

    def normalized(self):
        """Weights as fractions of their total."""
        kw = self.kernel_weights
        return kw / kw.sum()

    def with_beta(self, beta, **changes):
        return replace(self, beta=beta, **changes)


def uniform_weights(n_components):
    """The equal ``1/M`` weighting of plain MC/QMC features."""
    return FeatureWeights(np.full(n_components, 1.0 / n_components), kind=UNIFORM, clamped=True)


def sample_mc_frequencies(n_components, dim, sigma, seed):
    """Draw M i.i.d. frequencies from N(0, sigma^-2 I_d) with a PCG64 generator."""
    if n_components < 1 or dim < 1:
        raise ValueError("n_components and dim must be positive")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((n_components, dim)) / sigma
    return SpectralFrequencies(w, sigma=float(sigma), source=MONTE_CARLO, seed=seed)


def _projections(X, freqs):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != freqs.dim:
        raise DimensionMismatchError(
            f"data has {X.shape[1]} columns but frequencies have dimension {freqs.dim}"
        )
    return X @ freqs.freqs.T


def _interleave(proj, pair_scale):
    out = np.empty((proj.shape[0], 2 * proj.shape[1]))
    out[:, 0::2] = np.cos(proj) * pair_scale
    out[:, 1::2] = np.sin(proj) * pair_scale
    return out


def feature_map(X, freqs):
    """Unweighted random Fourier features ``z(x)`` of shape (n, 2M)."""
    scale = 1.0 / np.sqrt(freqs.n_components)
    return FeatureMatrix(_interleave(_projections(X, freqs), scale), norm_scale=scale)


def weighted_feature_map(X, freqs, weights):
    """Features whose inner products equal ``sum_m kw_m cos(w_m . (x - x'))``.

    Column pair ``m`` carries the factor ``sqrt(kw_m)`` where ``kw`` are the
    kernel weights, so negative weights cannot be embedded; pass them through
    :func:`sesrff.ses.clamp_for_embedding` first.
    """
    if len(weights) != freqs.n_components:
        raise DimensionMismatchError(
            f"{len(weights)} weights for {freqs.n_components} frequencies"
        )
    kw = weights.kernel_weights
    if np.any(kw < 0):
        raise ContractViolationError(
            "negative weights cannot be embedded; clamp them first"
        )
    return FeatureMatrix(_interleave(_projections(X, freqs), np.sqrt(kw)), norm_scale=1.0)
