"""Experiment cells behind the CLI subcommands.

Each ``*_cell`` function is a pure function of the experiment spec and its
cell key (method, M, seed, ...) and returns one flat record dict.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial.distance import pdist

from ..approximation import RandomFourierFeatures
from ..bq import SIGMA_GP_GRID
from ..dataio import BINARY, load_sparse_text, make_synthetic, split, standardize, subsample
from ..exceptions import DegenerateSystemError, UnsupportedMethodError
from ..kernels import (
    GaussianKernel,
    exact_gram,
    kernel_estimate,
    relative_error,
    standard_normal_sampler,
    stein_risk_simulation,
)
from ..learn import (
    REGULARIZATION_GRID,
    SQUARED_HINGE,
    SQUARED_LOSS,
    classification_error,
    cross_validate,
    predict,
    relative_regression_error,
    ridge_fit,
    squared_hinge_fit,
)
from ..ses import (
    LAMBDA_GRID,
    build_pair_system,
    n_unordered_pairs,
    objective,
    sample_pairs,
    solve_shrinkage_weights,
    tune_lambda,
)
from ..spectral import BQ, MONTE_CARLO, QUASI_MONTE_CARLO, SES, UNIFORM, UNIFORM_SHRINKAGE

METHODS = {
    "mc": (MONTE_CARLO, UNIFORM),
    "qmc": (QUASI_MONTE_CARLO, UNIFORM),
    "bq": (QUASI_MONTE_CARLO, BQ),
    "ses": (QUASI_MONTE_CARLO, SES),
    "ses-uniform": (QUASI_MONTE_CARLO, UNIFORM_SHRINKAGE),
}

SIGMA_GRID = tuple(2.0**k for k in range(-10, 11, 2))

# pairs used as the unsketched pool in sketch sweeps when --pairs-train is absent
MAX_SWEEP_POOL = 50_000


@dataclass(frozen=True)
class ExperimentSpec:
    data_path: str = None
    synthetic: tuple = None
    task: str = None
    positive_class: float = None
    max_rows: int = None
    data_seed: int = 0
    methods: tuple = ("qmc",)
    Ms: tuple = (64,)
    sigma: object = "median"
    seeds: tuple = (0,)
    pairs_train: int = None
    pairs_val: int = None
    sketch_r: int = None
    r_grid: tuple = ()
    lambda_grid: tuple = LAMBDA_GRID
    sigma_gp_grid: tuple = SIGMA_GP_GRID
    reg_grid: tuple = REGULARIZATION_GRID
    eval_rows: int = 2000
    train_fraction: float = 0.8
    folds: int = 5
    trials: int = 100_000
    alpha: float = None
    mu: float = 0.0
    dim: int = 5
    timing: bool = False
    workers: int = 1

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seed list is empty")
        if any(m < 1 for m in self.Ms):
            raise ValueError("M values must be positive")
        for m in self.methods:
            if m not in METHODS:
                raise UnsupportedMethodError(f"unknown method {m!r}; choose from {sorted(METHODS)}")


@lru_cache(maxsize=8)
def _raw_dataset(spec_key):
    data_path, synthetic, task, positive_class, max_rows, data_seed = spec_key
    if data_path:
        data = load_sparse_text(data_path, task=task, positive_class=positive_class)
    elif synthetic:
        n, d = synthetic
        data = make_synthetic(n, d, seed=data_seed, task=task or "regression")
    else:
        raise ValueError("either a data path or a synthetic spec is required")
    return subsample(data, max_rows, data_seed)


def load_dataset(spec):
    return _raw_dataset((spec.data_path, spec.synthetic, spec.task, spec.positive_class,
                         spec.max_rows, spec.data_seed))


def dataset_name(spec):
    if spec.data_path:
        return load_dataset(spec).name
    return "synthetic-{}x{}".format(*spec.synthetic) if spec.synthetic else ""


def median_bandwidth(X, max_rows=1000, seed=0):
    """Median pairwise Euclidean distance on a seeded subsample."""
    if len(X) > max_rows:
        X = X[np.random.default_rng(seed).choice(len(X), max_rows, replace=False)]
    dist = pdist(X)
    dist = dist[dist > 0]
    return float(np.median(dist)) if dist.size else 1.0


def select_bandwidth_cv(X, y, task, M, seed=0, grid=SIGMA_GRID, reg_grid=REGULARIZATION_GRID,
                        folds=5, max_rows=2000):
    """Bandwidth from a grid by cross-validating QMC features on the targets."""
    if len(X) > max_rows:
        idx = np.random.default_rng(seed).choice(len(X), max_rows, replace=False)
        X, y = X[idx], y[idx]
    objective = SQUARED_HINGE if task == BINARY else SQUARED_LOSS
    best = None
    for s in grid:
        Z = RandomFourierFeatures(M, s, "qmc", "uniform", random_state=seed).fit(X).transform(X)
        cv = cross_validate(Z, y, reg_grid, folds, objective, seed)
        score = cv.scores[cv.best]
        if best is None or score < best[1]:
            best = (s, score)
    return best[0]


def resolve_sigma(spec, X, y=None, task=None, M=64, seed=0):
    if isinstance(spec.sigma, str):
        if spec.sigma == "median":
            return median_bandwidth(X)
        if spec.sigma == "grid":
            if y is None:
                raise ValueError("--sigma grid needs targets to cross-validate against")
            return select_bandwidth_cv(X, y, task, M, seed=seed, reg_grid=spec.reg_grid, folds=spec.folds)
        raise ValueError(f"unknown sigma mode {spec.sigma!r}")
    return float(spec.sigma)


def _approx_split(spec, seed):
    """Standardised fit rows and held-out evaluation rows for one seed."""
    data = load_dataset(spec)
    data, _ = standardize(data)
    n = data.n_samples
    n_eval = min(spec.eval_rows, n // 2)
    perm = np.random.default_rng([seed, 99]).permutation(n)
    ev = data.take(np.sort(perm[:n_eval]))
    fit = data.take(np.sort(perm[n_eval:]))
    return fit, ev


def _make_rff(spec, method, M, sigma, seed, **overrides):
    sampler, weighting = METHODS[method]
    params = dict(
        n_components=M, sigma=sigma, sampler=sampler, weighting=weighting,
        lambda_grid=spec.lambda_grid, sigma_gp_grid=spec.sigma_gp_grid,
        n_train_pairs=spec.pairs_train, n_val_pairs=spec.pairs_val,
        sketch_r=spec.sketch_r, random_state=seed,
    )
    params.update(overrides)
    return RandomFourierFeatures(**params)


def _hyper(rff):
    return {
        "lambda_beta": rff.lambda_,
        "sigma_gp": rff.sigma_gp_,
    }


@lru_cache(maxsize=32)
def _approx_context(spec, seed):
    fit, ev = _approx_split(spec, seed)
    sigma = resolve_sigma(spec, fit.features, fit.targets, fit.task, max(spec.Ms), seed)
    K = exact_gram(ev.features, ev.features, GaussianKernel(sigma))
    return fit, ev, sigma, K


def _timed(fn):
    def wrapper(spec, *key):
        t0 = time.perf_counter()
        rec = fn(spec, *key)
        rec["wall_time_s"] = round(time.perf_counter() - t0, 6) if spec.timing else None
        return rec

    wrapper.__name__ = fn.__name__
    return wrapper


@_timed
def approx_cell(spec, method, M, seed):
    fit, ev, sigma, K = _approx_context(spec, seed)
    rff = _make_rff(spec, method, M, sigma, seed).fit(fit.features)
    err = relative_error(K, rff.approximate_kernel(ev.features))
    return {
        "command": "approx", "dataset": dataset_name(spec), "method": method, "M": M,
        "seed": seed, "sigma": sigma, **_hyper(rff), "n_fit": fit.n_samples,
        "n_eval": ev.n_samples, "rel_kernel_error": err,
    }


@_timed
def train_cell(spec, method, M, seed):
    data = load_dataset(spec)
    train, test = split(data, spec.train_fraction, seed)
    train, (test,) = standardize(train, [test])
    sigma = resolve_sigma(spec, train.features, train.targets, train.task, M, seed)
    rff = _make_rff(spec, method, M, sigma, seed).fit(train.features)
    Ztr, Zte = rff.transform(train.features), rff.transform(test.features)
    objective = SQUARED_HINGE if train.task == BINARY else SQUARED_LOSS
    cv = cross_validate(Ztr, train.targets, spec.reg_grid, spec.folds, objective, seed)
    if objective == SQUARED_HINGE:
        model = squared_hinge_fit(Ztr, train.targets, cv.best)
        err = classification_error(test.targets, predict(model, Zte))
        metric = "classification_error"
    else:
        model = ridge_fit(Ztr, train.targets, cv.best)
        err = relative_regression_error(test.targets, predict(model, Zte))
        metric = "relative_regression_error"
    return {
        "command": "train", "dataset": dataset_name(spec), "task": train.task,
        "method": method, "M": M, "seed": seed, "sigma": sigma, **_hyper(rff),
        "regularization": cv.best, "n_train": train.n_samples, "n_test": test.n_samples,
        "metric": metric, "test_error": err,
    }


@_timed
def weights_cell(spec, method, M, seed):
    if method not in ("bq", "ses"):
        raise UnsupportedMethodError(f"weights are only reported for bq and ses, not {method!r}")
    fit, _, sigma, _ = _approx_context(spec, seed)
    rff = _make_rff(spec, method, M, sigma, seed).fit(fit.features)
    w = rff.raw_weights_
    return {
        "command": "weights", "dataset": dataset_name(spec), "method": method, "M": M,
        "seed": seed, "sigma": sigma, **_hyper(rff), "weight_sum": w.total,
        "uniform_weight": 1.0 / M,
        "weights": [float(v) for v in w.kernel_weights],
        "normalized_weights": [float(v) for v in w.normalized()],
    }


def _sweep_pairs(spec, n, M, seed):
    """Unsketched training pool and disjoint validation pairs for a sketch sweep."""
    total = n_unordered_pairs(n)
    pool = spec.pairs_train or min(total, MAX_SWEEP_POOL)
    n_val = spec.pairs_val or 2 * M
    rng = np.random.default_rng([seed, 3])
    pairs = sample_pairs(n, min(total, pool + n_val), rng)
    pairs = pairs[rng.permutation(len(pairs))]
    return pairs[n_val:], pairs[:n_val]


@_timed
def sketch_cell(spec, M, r, seed):
    fit, ev, sigma, K = _approx_context(spec, seed)
    qmc = _make_rff(spec, "qmc", M, sigma, seed).fit(fit.features)
    train_pairs, val_pairs = _sweep_pairs(spec, fit.n_samples, M, seed)
    try:
        search = tune_lambda(fit.features, qmc.frequencies_, GaussianKernel(sigma),
                             spec.lambda_grid, train_pairs, val_pairs, seed=[seed, 4],
                             sketch_r=r)
    except (DegenerateSystemError, np.linalg.LinAlgError):
        # the sketch kept no usable rows (possible for tiny r)
        lam, rows, ses_err, ratio = None, 0, float("nan"), float("nan")
    else:
        lam, rows = search.lam, search.n_train_rows
        approx = kernel_estimate(ev.features, ev.features, qmc.frequencies_, search.weights)
        ses_err = relative_error(K, approx)
        full = build_pair_system(fit.features, train_pairs, qmc.frequencies_, GaussianKernel(sigma))
        exact = solve_shrinkage_weights(full, lam)
        ratio = objective(full, search.weights.beta, lam) / objective(full, exact.beta, lam)
    return {
        "command": "sketch-sweep", "dataset": dataset_name(spec), "method": "ses",
        "M": M, "r": r, "seed": seed, "sigma": sigma, "lambda_beta": lam,
        "pool_rows": len(train_pairs), "rows_kept": rows,
        "objective_ratio": ratio, "ses_error": ses_err, "qmc_error": relative_error(K, qmc.approximate_kernel(ev.features)),
    }


@_timed
def shrinkage_cell(spec, M, seed):
    fit, ev, sigma, K = _approx_context(spec, seed)
    out = {"command": "shrinkage-compare", "dataset": dataset_name(spec), "M": M,
           "seed": seed, "sigma": sigma}
    for method in ("ses", "ses-uniform", "qmc"):
        rff = _make_rff(spec, method, M, sigma, seed).fit(fit.features)
        key = method.replace("-", "_")
        out[f"{key}_error"] = relative_error(K, rff.approximate_kernel(ev.features))
        if method != "qmc":
            out[f"{key}_lambda"] = rff.lambda_
    return out


@_timed
def stein_cell(spec, M, seed):
    sigma = 1.0 if isinstance(spec.sigma, str) else float(spec.sigma)
    res = stein_risk_simulation(GaussianKernel(sigma), M, alpha=spec.alpha, mu=spec.mu,
                                trials=spec.trials, seed=seed,
                                data_sampler=standard_normal_sampler(spec.dim))
    return {
        "command": "stein-sim", "M": M, "seed": seed, "sigma": sigma, "dim": spec.dim,
        "trials": spec.trials, "mu": res.mu, "alpha": res.alpha,
        "alpha_star_estimate": res.alpha_star_estimate, "risk_uniform": res.risk_uniform,
        "risk_shrunk": res.risk_shrunk, "diff_stderr": res.diff_stderr,
    }


FIELDS = {
    "approx": ["command", "dataset", "method", "M", "seed", "sigma", "lambda_beta",
               "sigma_gp", "n_fit", "n_eval", "rel_kernel_error", "wall_time_s"],
    "train": ["command", "dataset", "task", "method", "M", "seed", "sigma", "lambda_beta",
              "sigma_gp", "regularization", "n_train", "n_test", "metric", "test_error",
              "wall_time_s"],
    "weights": ["command", "dataset", "method", "M", "seed", "sigma", "lambda_beta",
                "sigma_gp", "weight_sum", "uniform_weight", "weights", "normalized_weights",
                "wall_time_s"],
    "sketch-sweep": ["command", "dataset", "method", "M", "r", "seed", "sigma", "lambda_beta",
                     "pool_rows", "rows_kept", "objective_ratio", "ses_error", "qmc_error", "wall_time_s"],
    "shrinkage-compare": ["command", "dataset", "M", "seed", "sigma", "ses_error",
                          "ses_lambda", "ses_uniform_error", "ses_uniform_lambda",
                          "qmc_error", "wall_time_s"],
    "stein-sim": ["command", "M", "seed", "sigma", "dim", "trials", "mu", "alpha",
                  "alpha_star_estimate", "risk_uniform", "risk_shrunk", "diff_stderr",
                  "wall_time_s"],
}


def cells(command, spec):
    """Canonically ordered ``(function, key)`` list for a command."""
    if command in ("approx", "train", "weights"):
        fn = {"approx": approx_cell, "train": train_cell, "weights": weights_cell}[command]
        if command == "weights":
            for m in spec.methods:
                if m not in ("bq", "ses"):
                    raise UnsupportedMethodError(
                        f"weights are only reported for bq and ses, not {m!r}")
        return [(fn, (m, M, s)) for m in spec.methods for M in spec.Ms for s in spec.seeds]
    if command == "sketch-sweep":
        if not spec.r_grid:
            raise ValueError("sketch-sweep needs --r-grid")
        return [(sketch_cell, (M, r, s)) for M in spec.Ms for r in spec.r_grid for s in spec.seeds]
    if command == "shrinkage-compare":
        return [(shrinkage_cell, (M, s)) for M in spec.Ms for s in spec.seeds]
    if command == "stein-sim":
        return [(stein_cell, (M, s)) for M in spec.Ms for s in spec.seeds]
    raise ValueError(f"unknown command {command!r}")


def run(command, spec):
    """Run every cell of ``command``; records come back in canonical cell order."""
    todo = cells(command, spec)
    if spec.workers > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            futures = [pool.submit(fn, spec, *key) for fn, key in todo]
            return [f.result() for f in futures]
    return [fn(spec, *key) for fn, key in todo]
