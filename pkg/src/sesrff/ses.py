"""Shrinkage weights fitted by (sketched) ridge regression on data pairs.

For a sampled pair ``(i, j)`` the target is the exact kernel value and the
design row holds each frequency's share of the unweighted estimate,
``cos(w_m . (x_i - x_j)) / M``. With ``beta = 1`` the model reproduces the
plain Monte Carlo estimate; the ridge penalty pulls ``beta`` towards zero.
"""

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .exceptions import DegenerateSystemError, RankDeficientError
from .spectral import SES, UNIFORM_SHRINKAGE, FeatureWeights

LAMBDA_GRID = tuple(2.0**k for k in range(-8, 9, 2))


class PairIndex(NamedTuple):
    i: int
    j: int


def _as_pair_array(pairs):
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pairs must have shape (r, 2)")
    if arr.shape[0] == 0:
        raise ValueError("at least one pair is required")
    return arr


def n_unordered_pairs(n):
    return n * (n + 1) // 2


def unrank_pairs(k, n):
    """Map linear indices ``0 <= k < n(n+1)/2`` to pairs ``(i, j)`` with ``i <= j``."""
    k = np.asarray(k, dtype=np.int64)
    j = ((np.sqrt(8.0 * k + 1.0) - 1.0) // 2).astype(np.int64)
    # float rounding can put j off by one near triangular numbers
    j -= (j * (j + 1) // 2) > k
    j += ((j + 1) * (j + 2) // 2) <= k
    i = k - j * (j + 1) // 2
    return np.column_stack((i, j))


def sample_pairs(n, count, rng):
    """Uniformly sample ``count`` distinct unordered pairs (self-pairs allowed).

    When ``count`` reaches the number of pairs, all of them are returned.
    """
    total = n_unordered_pairs(n)
    if count >= total:
        return unrank_pairs(np.arange(total), n)
    if count > total // 4:
        chosen = rng.choice(total, size=count, replace=False)
    else:
        chosen = np.empty(0, dtype=np.int64)
        while chosen.size < count:
            draw = rng.integers(0, total, size=2 * (count - chosen.size))
            merged = np.concatenate((chosen, draw))
            _, first = np.unique(merged, return_index=True)
            chosen = merged[np.sort(first)][:count]
    return unrank_pairs(chosen, n)


def sample_train_val_pairs(n, n_train, n_val, seed):
    """Disjoint training and validation pair sets drawn from one generator."""
    rng = np.random.default_rng(seed)
    pairs = sample_pairs(n, n_train + n_val, rng)
    if len(pairs) < n_train + n_val:
        # not enough pairs for disjoint sets: shuffle and split what exists
        pairs = pairs[rng.permutation(len(pairs))]
        cut = max(1, min(n_train, len(pairs) - 1))
        return pairs[:cut], pairs[cut:]
    return pairs[:n_train], pairs[n_train:]


def pair_differences(X, pairs):
    X = np.asarray(X, dtype=float)
    pairs = _as_pair_array(pairs)
    n = X.shape[0]
    if pairs.min() < 0 or pairs.max() >= n:
        raise IndexError(f"pair index out of range for {n} rows")
    return X[pairs[:, 0]] - X[pairs[:, 1]]


def pair_targets(X, pairs, kernel):
    diff = pair_differences(X, pairs)
    return kernel.from_sqdist(np.sum(diff * diff, axis=1))


def pair_design(X, pairs, freqs):
    diff = pair_differences(X, pairs)
    return np.cos(diff @ freqs.freqs.T) / freqs.n_components


@dataclass(frozen=True)
class PairSystem:
    """Targets ``t`` and design ``Z`` of the pair regression, optionally row-sampled.

    ``row_scales`` multiply both sides of each row; they are 1 for an
    unsketched system and ``1/sqrt(p_k)`` for rows kept by :func:`sample_sketch`.
    """

    targets: np.ndarray
    design: np.ndarray
    pairs: np.ndarray
    row_scales: np.ndarray
    sketched: bool = False

    @property
    def n_rows(self):
        return self.design.shape[0]

    @property
    def n_components(self):
        return self.design.shape[1]

    def scaled(self):
        """Return ``(S t, S Z)``."""
        s = self.row_scales
        return self.targets * s, self.design * s[:, None]


def build_pair_system(X, pairs, freqs, kernel):
    pairs = _as_pair_array(pairs)
    return PairSystem(
        targets=pair_targets(X, pairs, kernel),
        design=pair_design(X, pairs, freqs),
        pairs=pairs,
        row_scales=np.ones(len(pairs)),
    )


def sample_sketch(system, r, seed):
    """Keep row ``k`` with probability ``p_k = min(1, r ||Z_k|| / sum_l ||Z_l||)``.

    Kept rows are rescaled by ``1/sqrt(p_k)`` so that ``E[(SZ)^T (SZ)] = Z^T Z``.
    A budget covering every row keeps the system as is, with unit scales.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    if system.sketched:
        raise ValueError("system is already sketched")
    if r >= system.n_rows:
        return replace(system, sketched=True)
    norms = np.linalg.norm(system.design, axis=1)
    total = norms.sum()
    if total == 0:
        raise DegenerateSystemError("all design rows are zero")
    p = np.minimum(1.0, r * norms / total)
    keep = np.random.default_rng(seed).random(len(p)) < p
    return PairSystem(
        targets=system.targets[keep],
        design=system.design[keep],
        pairs=system.pairs[keep],
        row_scales=1.0 / np.sqrt(p[keep]),
        sketched=True,
    )


def objective(system, beta, lam):
    """``||S t - S Z beta||^2 + lam ||beta||^2``."""
    t, Z = system.scaled()
    resid = t - Z @ beta
    return float(resid @ resid + lam * beta @ beta)


def _check_lambda(lam):
    if not lam >= 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")


def solve_shrinkage_weights(system, lam):
    """Per-frequency ridge solution ``(Z^T D Z + lam I)^-1 Z^T D t``."""
    _check_lambda(lam)
    if system.n_rows < 1:
        raise DegenerateSystemError("system has no rows")
    t, Z = system.scaled()
    M = system.n_components
    if lam == 0 and np.linalg.matrix_rank(Z) < M:
        raise RankDeficientError("design is rank deficient; use lambda > 0")
    A = Z.T @ Z
    A[np.diag_indices_from(A)] += lam
    try:
        beta = cho_solve(cho_factor(A, lower=True), Z.T @ t)
    except LinAlgError as exc:
        raise RankDeficientError("normal equations are singular; use lambda > 0") from exc
    return FeatureWeights(beta, lam=float(lam), kind=SES, clamped=False, scale=1.0 / M)


def solve_uniform_shrinkage(system, lam):
    """One shared weight ``c`` fitted by 1-D ridge; returns ``beta = c * 1``."""
    _check_lambda(lam)
    t, Z = system.scaled()
    s = Z.sum(axis=1)
    denom = s @ s + lam
    if denom == 0:
        raise RankDeficientError("design sums to zero; use lambda > 0")
    c = float(s @ t / denom)
    M = system.n_components
    return FeatureWeights(np.full(M, c), lam=float(lam), kind=UNIFORM_SHRINKAGE,
                          clamped=False, scale=1.0 / M)


def clamp_for_embedding(weights):
    """Zero out negative weights so ``sqrt(beta)`` is defined."""
    return replace(weights, beta=np.maximum(weights.beta, 0.0), clamped=True)


def pair_error(system, weights):
    """Mean squared kernel error of ``weights`` on an unsketched pair system."""
    M = system.n_components
    pred = system.design @ (M * weights.kernel_weights)
    return float(np.mean((system.targets - pred) ** 2))


@dataclass(frozen=True)
class LambdaSearch:
    lam: float
    weights: FeatureWeights
    errors: dict
    uniform_error: float
    n_train_rows: int


def tune_lambda(X, freqs, kernel, grid=LAMBDA_GRID, train_pairs=None, val_pairs=None,
                seed=0, sketch_r=None, uniform=False):
    """Choose the ridge coefficient on held-out pairs.

    Parameters
    ----------
    X : ndarray of shape (n, d)
    freqs : SpectralFrequencies
    kernel : GaussianKernel
    grid : sequence of float
        Candidate coefficients; duplicates are ignored.
    train_pairs, val_pairs : int or array of shape (r, 2), optional
        Pair counts (sampled disjointly with ``seed``) or explicit pair arrays.
        Counts default to ``4 M`` and ``2 M``.
    seed : int
    sketch_r : int, optional
        If given, the training system is reduced by :func:`sample_sketch`.
    uniform : bool, default=False
        Fit one shared weight (:func:`solve_uniform_shrinkage`) instead.

    Returns
    -------
    LambdaSearch
        The chosen coefficient, the weights refitted with it, the validation
        error per grid value and the validation error of ``beta = 1``. Ties
        are broken toward the larger coefficient.
    """
    grid = sorted(set(float(v) for v in grid))
    if not grid:
        raise ValueError("lambda grid is empty")
    M = freqs.n_components
    pair_ss, sketch_ss = np.random.SeedSequence(seed).spawn(2)
    if train_pairs is None or np.isscalar(train_pairs) or val_pairs is None or np.isscalar(val_pairs):
        n_train = 4 * M if train_pairs is None else int(train_pairs)
        n_val = 2 * M if val_pairs is None else int(val_pairs)
        train_pairs, val_pairs = sample_train_val_pairs(len(X), n_train, n_val, pair_ss)

    train = build_pair_system(X, train_pairs, freqs, kernel)
    if sketch_r is not None:
        train = sample_sketch(train, sketch_r, sketch_ss)
    val = build_pair_system(X, val_pairs, freqs, kernel)
    solve = solve_uniform_shrinkage if uniform else solve_shrinkage_weights

    errors = {}
    best = None
    for lam in grid:
        try:
            w = solve(train, lam)
        except RankDeficientError:
            errors[lam] = np.inf
            continue
        err = pair_error(val, w)
        errors[lam] = err
        if best is None or err <= best[1]:
            best = (lam, err, w)
    if best is None:
        raise RankDeficientError("every lambda in the grid gave a singular system")
    lam, _, weights = best
    uniform_err = float(np.mean((val.targets - val.design.sum(axis=1)) ** 2))
    weights = replace(weights, info={"lambda_errors": errors, "train_rows": train.n_rows})
    return LambdaSearch(lam, weights, errors, uniform_err, train.n_rows)
