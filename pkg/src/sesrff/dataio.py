"""Sparse text datasets, standardisation and splitting.

File format: one record per line, ``label idx:val idx:val ...`` with
one-based, strictly increasing feature indices. Blank lines and lines
starting with ``#`` are skipped.
"""

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .exceptions import DatasetParseError, DimensionMismatchError, InvalidSplitError

REGRESSION = "regression"
BINARY = "binary"


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    targets: np.ndarray
    task: str = REGRESSION
    standardized: bool = False
    feature_means: np.ndarray = None
    feature_stds: np.ndarray = None
    name: str = ""

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.targets, dtype=float)
        if X.ndim != 2:
            raise ValueError("features must be a 2-D array")
        if y.shape != (X.shape[0],):
            raise DimensionMismatchError(f"{X.shape[0]} rows but {y.shape} targets")
        if self.task not in (REGRESSION, BINARY):
            raise ValueError(f"unknown task {self.task!r}")
        if self.task == BINARY and not np.all((y == 1) | (y == -1)):
            raise ValueError("binary targets must be -1 or +1")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def take(self, index):
        return replace(self, features=self.features[index], targets=self.targets[index])


def _parse_line(line, lineno):
    tokens = line.split()
    try:
        label = float(tokens[0])
    except ValueError:
        raise DatasetParseError(f"bad label {tokens[0]!r}", lineno) from None
    cols, vals = [], []
    last = 0
    for tok in tokens[1:]:
        idx, sep, val = tok.partition(":")
        if not sep:
            raise DatasetParseError(f"expected idx:val, got {tok!r}", lineno)
        try:
            j = int(idx)
            v = float(val)
        except ValueError:
            raise DatasetParseError(f"bad entry {tok!r}", lineno) from None
        if j <= last:
            raise DatasetParseError(f"feature indices must be increasing and >= 1 at {tok!r}", lineno)
        last = j
        cols.append(j - 1)
        vals.append(v)
    return label, cols, vals


def infer_task(targets):
    y = np.asarray(targets)
    return BINARY if len(y) and np.all((y == 1) | (y == -1)) else REGRESSION


def load_sparse_text(path, expected_dim=None, task=None, positive_class=None):
    """Read a sparse text file into a dense :class:`Dataset`.

    Parameters
    ----------
    path : str or Path
    expected_dim : int, optional
        Number of columns; an index beyond it is an error.
    task : {"regression", "binary"}, optional
        Inferred when omitted: binary iff every label is -1 or +1.
    positive_class : float, optional
        Binarise labels: this label becomes +1, all others -1.
    """
    labels, rows, cols, vals = [], [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            label, c, v = _parse_line(line, lineno)
            rows.extend([len(labels)] * len(c))
            labels.append(label)
            cols.extend(c)
            vals.extend(v)
    max_dim = max(cols) + 1 if cols else 0
    if expected_dim is not None:
        if max_dim > expected_dim:
            raise DimensionMismatchError(
                f"feature index {max_dim} exceeds expected dimension {expected_dim}"
            )
        dim = expected_dim
    else:
        dim = max_dim
    X = np.zeros((len(labels), dim))
    X[rows, cols] = vals
    y = np.asarray(labels, dtype=float)
    if positive_class is not None:
        y = np.where(y == float(positive_class), 1.0, -1.0)
        task = BINARY
    return Dataset(X, y, task or infer_task(y), name=Path(path).stem)


def write_sparse_text(data, path):
    """Write ``data`` in sparse text form, dropping exact zeros."""
    with open(path, "w") as fh:
        for x, label in zip(data.features, data.targets):
            nz = np.flatnonzero(x)
            entries = " ".join(f"{j + 1}:{float(x[j])!r}" for j in nz)
            lab = repr(float(label))
            fh.write(f"{lab} {entries}".rstrip() + "\n")


def standardize(train, others=()):
    """Scale to zero mean and unit variance with statistics of ``train`` only.

    Constant training columns are left untouched (mean 0, std 1).
    """
    X = train.features
    if X.shape[0] == 0:
        raise ValueError("training set is empty")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    const = std < 1e-12 * np.maximum(1.0, np.abs(mean))
    mean = np.where(const, 0.0, mean)
    std = np.where(const, 1.0, std)

    def apply(ds):
        return replace(ds, features=(ds.features - mean) / std, standardized=True,
                       feature_means=mean, feature_stds=std)

    return apply(train), [apply(ds) for ds in others]


def split(data, train_fraction, seed):
    """Seeded permutation split into disjoint train and test parts."""
    if not 0 < train_fraction < 1:
        raise InvalidSplitError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = data.n_samples
    n_train = int(round(train_fraction * n))
    if n_train == 0 or n_train == n:
        raise InvalidSplitError(f"fraction {train_fraction} leaves an empty side for n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return data.take(np.sort(perm[:n_train])), data.take(np.sort(perm[n_train:]))


def subsample(data, n_rows, seed):
    if n_rows is None or n_rows >= data.n_samples:
        return data
    idx = np.random.default_rng(seed).choice(data.n_samples, size=n_rows, replace=False)
    return data.take(np.sort(idx))


def make_synthetic(n, d, seed=0, task=REGRESSION, noise=0.1):
    """Standard normal features with a linear-plus-sine target.

    For ``task="binary"`` the target is thresholded at its median.
    """
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    a = rng.standard_normal(d) / np.sqrt(d)
    b = rng.standard_normal(d)
    y = X @ a + np.sin(X @ b) + noise * rng.standard_normal(n)
    if task == BINARY:
        y = np.where(y >= np.median(y), 1.0, -1.0)
    return Dataset(X, y, task, name=f"synthetic-{n}x{d}")
