"""Linear learners on random features: ridge regression and L2-loss SVM."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.multiclass import type_of_target, unique_labels
from sklearn.utils.validation import check_is_fitted, validate_data

from .exceptions import (
    DimensionMismatchError,
    InvalidFoldsError,
    LabelDomainError,
    RankDeficientError,
    UndefinedMetricError,
)

SQUARED_LOSS = "squared"
SQUARED_HINGE = "squared_hinge"

REGULARIZATION_GRID = tuple(2.0**k for k in range(-8, 9, 2))


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    regularization: float
    objective: str
    history: tuple = field(default=(), compare=False)
    n_iter: int = 0


def _matrix(Z):
    return np.asarray(getattr(Z, "values", Z), dtype=float)


def ridge_fit(Z, y, lam):
    """Minimise ``||y - Z w - b||^2 + lam ||w||^2`` with an unpenalised intercept."""
    Z = _matrix(Z)
    y = np.asarray(y, dtype=float)
    if Z.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"{Z.shape[0]} rows but {y.shape[0]} targets")
    if not lam >= 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    z_mean = Z.mean(axis=0)
    y_mean = y.mean()
    Zc = Z - z_mean
    p = Z.shape[1]
    if lam == 0 and np.linalg.matrix_rank(Zc) < p:
        raise RankDeficientError("centred features are rank deficient; use lambda > 0")
    A = Zc.T @ Zc
    A[np.diag_indices_from(A)] += lam
    try:
        w = cho_solve(cho_factor(A, lower=True), Zc.T @ (y - y_mean))
    except LinAlgError as exc:
        raise RankDeficientError("normal equations are singular; use lambda > 0") from exc
    return LinearModel(w, float(y_mean - z_mean @ w), float(lam), SQUARED_LOSS)


def _check_pm1(y):
    y = np.asarray(y, dtype=float)
    if not np.all((y == 1) | (y == -1)):
        raise LabelDomainError("labels must be -1 or +1")
    return y


def squared_hinge_objective(Z, y, w, b, C):
    margin = np.maximum(0.0, 1.0 - y * (Z @ w + b))
    return 0.5 * w @ w + C * margin @ margin


def squared_hinge_fit(Z, y, C, tol=1e-6, max_iter=200):
    """L2-loss SVM, ``1/2 ||w||^2 + C sum max(0, 1 - y (w.z + b))^2``.

    Solved by Newton's method on the generalised Hessian with Armijo
    backtracking, so the objective never increases between iterations.
    Stops once the gradient norm is at most ``tol``.
    """
    Z = _matrix(Z)
    y = _check_pm1(y)
    if Z.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"{Z.shape[0]} rows but {y.shape[0]} labels")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    n, p = Z.shape
    Za = np.hstack((Z, np.ones((n, 1))))
    theta = np.zeros(p + 1)
    reg = np.ones(p + 1)
    reg[-1] = 0.0

    def fun(th):
        margin = np.maximum(0.0, 1.0 - y * (Za @ th))
        return 0.5 * th[:p] @ th[:p] + C * margin @ margin, margin

    f, margin = fun(theta)
    history = [f]
    for _ in range(max_iter):
        active = margin > 0
        grad = reg * theta - 2.0 * C * Za[active].T @ (y[active] * margin[active])
        if np.linalg.norm(grad) <= tol:
            break
        Zact = Za[active]
        H = 2.0 * C * Zact.T @ Zact
        H[np.diag_indices_from(H)] += reg + 1e-12
        step = -np.linalg.solve(H, grad)
        slope = grad @ step
        t = 1.0
        while True:
            f_new, margin_new = fun(theta + t * step)
            if f_new <= f + 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        if f_new > f:
            break
        theta = theta + t * step
        f, margin = f_new, margin_new
        history.append(f)
    return LinearModel(theta[:p], float(theta[p]), float(C), SQUARED_HINGE,
                       history=tuple(history), n_iter=len(history) - 1)


def predict(model, Z):
    Z = _matrix(Z)
    if Z.shape[1] != model.weights.shape[0]:
        raise DimensionMismatchError(
            f"model expects {model.weights.shape[0]} features, got {Z.shape[1]}"
        )
    score = Z @ model.weights + model.bias
    if model.objective == SQUARED_HINGE:
        return np.where(score >= 0, 1.0, -1.0)
    return score


def relative_regression_error(y, yhat):
    y = np.asarray(y, dtype=float)
    denom = np.linalg.norm(y)
    if denom == 0:
        raise UndefinedMetricError("targets have zero norm")
    return float(np.linalg.norm(y - np.asarray(yhat, dtype=float)) / denom)


def classification_error(y, yhat):
    y, yhat = np.asarray(y), np.asarray(yhat)
    if y.shape != yhat.shape:
        raise DimensionMismatchError("label vectors differ in length")
    return float(np.mean(y != yhat))


@dataclass(frozen=True)
class CVResult:
    best: float
    scores: dict


def _fit(objective, Z, y, value):
    if objective == SQUARED_LOSS:
        return ridge_fit(Z, y, value)
    if objective == SQUARED_HINGE:
        return squared_hinge_fit(Z, y, value)
    raise ValueError(f"unknown objective {objective!r}")


def _score(objective, y, yhat):
    if objective == SQUARED_LOSS:
        return float(np.mean((y - yhat) ** 2))
    return classification_error(y, yhat)


def cross_validate(Z, y, grid=REGULARIZATION_GRID, folds=5, objective=SQUARED_LOSS, seed=0):
    """K-fold choice of ``lambda`` (ridge) or ``C`` (squared hinge).

    Validation error is mean squared error for regression and the
    misclassification rate for classification. Ties go to the stronger
    regularisation: larger ``lambda`` or smaller ``C``.
    """
    Z = _matrix(Z)
    y = np.asarray(y, dtype=float)
    n = Z.shape[0]
    if folds < 2 or folds > n:
        raise InvalidFoldsError(f"need 2 <= folds <= {n}, got {folds}")
    values = sorted(set(float(v) for v in grid))
    if not values:
        raise ValueError("grid is empty")
    # strongest regularisation first so strict '<' keeps it on ties
    if objective == SQUARED_LOSS:
        values = values[::-1]
    perm = np.random.default_rng(seed).permutation(n)
    parts = np.array_split(perm, folds)
    scores = {}
    best = None
    for v in values:
        errs = []
        for k in range(folds):
            val = parts[k]
            train = np.concatenate([parts[j] for j in range(folds) if j != k])
            try:
                model = _fit(objective, Z[train], y[train], v)
            except (RankDeficientError, LabelDomainError):
                errs.append(np.inf)
                continue
            errs.append(_score(objective, y[val], predict(model, Z[val])))
        scores[v] = float(np.mean(errs))
        if best is None or scores[v] < scores[best]:
            best = v
    return CVResult(best, scores)


class RidgeRegressor(RegressorMixin, BaseEstimator):
    """Ridge regression with an unpenalised intercept."""

    def __init__(self, alpha=1.0):
        self.alpha = alpha

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=float, y_numeric=True)
        self.model_ = ridge_fit(X, y, self.alpha)
        self.coef_ = self.model_.weights
        self.intercept_ = self.model_.bias
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = validate_data(self, X, dtype=float, reset=False)
        return predict(self.model_, X)


class SquaredHingeClassifier(ClassifierMixin, BaseEstimator):
    """Binary L2-loss linear SVM; the larger class label maps to +1."""

    def __init__(self, C=1.0, tol=1e-6, max_iter=200):
        self.C = C
        self.tol = tol
        self.max_iter = max_iter

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.classifier_tags.multi_class = False
        return tags

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=float)
        y_type = type_of_target(y, input_name="y", raise_unknown=True)
        if y_type != "binary":
            raise LabelDomainError(
                f"Only binary classification is supported. The type of the target is {y_type}."
            )
        self.classes_ = unique_labels(y)
        if len(self.classes_) != 2:
            raise LabelDomainError(f"expected 2 classes, got {len(self.classes_)} class(es)")
        ypm = np.where(y == self.classes_[1], 1.0, -1.0)
        self.model_ = squared_hinge_fit(X, ypm, self.C, self.tol, self.max_iter)
        self.n_iter_ = self.model_.n_iter
        self.coef_ = self.model_.weights
        self.intercept_ = self.model_.bias
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        X = validate_data(self, X, dtype=float, reset=False)
        return X @ self.coef_ + self.intercept_

    def predict(self, X):
        check_is_fitted(self, "model_")
        return self.classes_[(self.decision_function(X) >= 0).astype(int)]
