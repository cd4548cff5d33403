"""Scrambled and shifted Halton points, and their map to Gaussian frequencies."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

from .exceptions import NumericDomainError, UnsupportedDimensionError
from .spectral import QUASI_MONTE_CARLO, SpectralFrequencies

MAX_DIMENSION = 1000

# Safety net for points that land on the boundary of the unit cube.
_EPS = 2.0**-53


@lru_cache(maxsize=1)
def _prime_table():
    # the 1000th prime is 7919
    limit = 8000
    sieve = np.ones(limit, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    primes = np.flatnonzero(sieve)[:MAX_DIMENSION]
    primes.setflags(write=False)
    return primes


def first_primes(d):
    """Return the first ``d`` primes (the Halton bases)."""
    if d > MAX_DIMENSION:
        raise UnsupportedDimensionError(
            f"Halton points support at most {MAX_DIMENSION} dimensions, got {d}"
        )
    return _prime_table()[:d]


@dataclass(frozen=True)
class UnitCubePoints:
    """M points in the half-open unit cube [0, 1)^d."""

    points: np.ndarray
    scramble_seed: int = 0
    shift_seed: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-D array")
        if np.any(pts < 0.0) or np.any(pts >= 1.0):
            raise ValueError("unit-cube points must lie in [0, 1)")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n_points(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


def digit_permutation(base, scramble_seed, dim_index):
    """Digit permutation used for one Halton coordinate.

    Zero stays fixed so that the trailing zero digits of a finite index keep
    contributing nothing; the remaining ``base - 1`` digits are shuffled by a
    generator keyed on ``(scramble_seed, dim_index)``. Seed 0 is the identity.
    """
    if scramble_seed == 0 or base == 2:
        return np.arange(base)
    rng = np.random.default_rng([scramble_seed, dim_index])
    return np.concatenate(([0], 1 + rng.permutation(base - 1)))


def radical_inverse(indices, base, permutation=None):
    """Vectorised (optionally digit-permuted) radical inverse of integer indices."""
    idx = np.array(indices, dtype=np.int64)
    out = np.zeros(idx.shape, dtype=float)
    scale = 1.0 / base
    while np.any(idx > 0):
        digit = idx % base
        if permutation is not None:
            digit = permutation[digit]
        out += digit * scale
        idx //= base
        scale /= base
    return out


def halton_points(n_points, dim, scramble_seed=0, shift_seed=0):
    """First ``n_points`` points of the ``dim``-dimensional Halton sequence.

    Parameters
    ----------
    n_points : int
        Number of points M (indices 1..M; index 0 is skipped).
    dim : int
        Dimension d, at most 1000.
    scramble_seed : int, default=0
        Key for the per-dimension digit permutations; 0 disables scrambling.
    shift_seed : int, default=0
        Key for the Cranley-Patterson shift modulo 1; 0 disables the shift.

    Returns
    -------
    UnitCubePoints
    """
    if n_points < 1 or dim < 1:
        raise ValueError("n_points and dim must be positive")
    bases = first_primes(dim)
    index = np.arange(1, n_points + 1, dtype=np.int64)
    pts = np.empty((n_points, dim))
    for j, base in enumerate(bases):
        perm = digit_permutation(int(base), scramble_seed, j)
        pts[:, j] = radical_inverse(index, int(base), perm)
    if shift_seed != 0:
        shift = np.random.default_rng([shift_seed, 1]).random(dim)
        pts = np.mod(pts + shift, 1.0)
        pts[pts >= 1.0] = 0.0
    return UnitCubePoints(pts, scramble_seed, shift_seed)


def gaussian_transform(points, sigma, seed=0):
    """Map unit-cube points to frequencies of the Gaussian kernel.

    Each coordinate goes through the standard normal quantile and is divided
    by ``sigma``, so the points follow N(0, sigma^-2 I).
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    t = np.clip(points.points, _EPS, 1.0 - _EPS)
    w = ndtri(t) / sigma
    if not np.all(np.isfinite(w)):
        raise NumericDomainError("non-finite normal quantile after clamping")
    return SpectralFrequencies(w, sigma=float(sigma), source=QUASI_MONTE_CARLO, seed=seed)


def sample_qmc_frequencies(n_components, dim, sigma, seed):
    """Scrambled, shifted Halton frequencies keyed by one integer seed.

    The scramble and shift keys are derived from ``seed`` and are never 0, so
    every seed (including 0) yields a randomised point set.
    """
    key = 2 * int(seed) + 1
    pts = halton_points(n_components, dim, scramble_seed=key, shift_seed=key)
    return gaussian_transform(pts, sigma, seed=seed)
