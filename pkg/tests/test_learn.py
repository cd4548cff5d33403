import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from oracles import lstsq_ridge_with_bias
from sesrff.exceptions import (
    DimensionMismatchError,
    InvalidFoldsError,
    LabelDomainError,
    RankDeficientError,
    UndefinedMetricError,
)
from sesrff.learn import (
    REGULARIZATION_GRID,
    SQUARED_HINGE,
    SQUARED_LOSS,
    RidgeRegressor,
    SquaredHingeClassifier,
    classification_error,
    cross_validate,
    predict,
    relative_regression_error,
    ridge_fit,
    squared_hinge_fit,
    squared_hinge_objective,
)


def blobs(seed, n=80, p=4, shift=1.5):
    rng = np.random.default_rng(seed)
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    Z = rng.standard_normal((n, p)) + shift * y[:, None] * np.linspace(1, 0.2, p)
    return Z, y


@pytest.mark.parametrize("seed", range(10))
def test_ridge_matches_lstsq_oracle(seed):
    rng = np.random.default_rng(seed)
    n, p = 10 + 19 * seed, 2 + 3 * seed
    Z = rng.standard_normal((n, p))
    y = rng.standard_normal(n) + 3.0
    lam = 2.0 ** (seed - 4)
    model = ridge_fit(Z, y, lam)
    w, b = lstsq_ridge_with_bias(Z, y, lam)
    np.testing.assert_allclose(model.weights, w, rtol=1e-8, atol=1e-12)
    assert model.bias == pytest.approx(b, rel=1e-8)
    assert model.objective == SQUARED_LOSS


def test_ridge_recovers_noiseless_linear_target():
    rng = np.random.default_rng(0)
    Z = rng.standard_normal((50, 3))
    y = Z @ np.array([1.0, -2.0, 0.5]) + 4.0
    model = ridge_fit(Z, y, 1e-10)
    np.testing.assert_allclose(model.weights, [1.0, -2.0, 0.5], atol=1e-8)
    assert model.bias == pytest.approx(4.0)


def test_constant_targets_give_trivial_model():
    Z = np.random.default_rng(1).standard_normal((20, 3))
    model = ridge_fit(Z, np.full(20, 2.5), 1.0)
    np.testing.assert_allclose(model.weights, 0.0, atol=1e-14)
    np.testing.assert_allclose(predict(model, Z), 2.5)


def test_ridge_rank_deficient_at_zero():
    Z = np.ones((10, 2))
    with pytest.raises(RankDeficientError):
        ridge_fit(Z, np.arange(10.0), 0.0)


def test_ridge_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        ridge_fit(np.ones((3, 2)), np.ones(4), 1.0)
    model = ridge_fit(np.eye(3), np.ones(3), 1.0)
    with pytest.raises(DimensionMismatchError):
        predict(model, np.ones((2, 4)))


@pytest.mark.parametrize("seed", range(4))
def test_svm_matches_generic_optimiser(seed):
    Z, y = blobs(seed, shift=0.5)
    C = 0.5
    model = squared_hinge_fit(Z, y, C)

    def f(th):
        return squared_hinge_objective(Z, y, th[:-1], th[-1], C)

    ref = minimize(f, np.zeros(Z.shape[1] + 1), method="L-BFGS-B", options={"gtol": 1e-10, "ftol": 1e-14})
    assert f(np.append(model.weights, model.bias)) <= ref.fun + 1e-8
    np.testing.assert_allclose(np.append(model.weights, model.bias), ref.x, atol=1e-4)


def test_svm_history_monotone_and_converged():
    Z, y = blobs(3, shift=0.3)
    model = squared_hinge_fit(Z, y, 2.0)
    h = np.array(model.history)
    assert np.all(np.diff(h) <= 1e-12)
    assert model.n_iter == len(h) - 1 < 200
    assert h[-1] == pytest.approx(squared_hinge_objective(Z, y, model.weights, model.bias, 2.0))
    # stationarity at the optimum
    margin = np.maximum(0, 1 - y * (Z @ model.weights + model.bias))
    gw = model.weights - 2 * 2.0 * Z.T @ (y * margin)
    gb = -2 * 2.0 * np.sum(y * margin)
    assert np.linalg.norm(np.append(gw, gb)) <= 1e-6


def test_svm_separates_separable_data():
    Z, y = blobs(4, shift=6.0)
    model = squared_hinge_fit(Z, y, 10.0)
    assert classification_error(y, predict(model, Z)) == 0.0
    assert model.objective == SQUARED_HINGE


def test_svm_rejects_bad_labels():
    with pytest.raises(LabelDomainError):
        squared_hinge_fit(np.ones((3, 2)), np.array([0.0, 1.0, 1.0]), 1.0)


def test_svm_tiny_C_shrinks_weights():
    Z, y = blobs(5)
    # the optimum is w = 2C sum_i y_i m_i z_i, of order C n
    assert np.linalg.norm(squared_hinge_fit(Z, y, 1e-8).weights) < 1e-4


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100))
def test_svm_is_never_worse_than_zero(seed, C):
    Z, y = blobs(seed, n=30, p=3, shift=0.4)
    model = squared_hinge_fit(Z, y, C)
    zero = squared_hinge_objective(Z, y, np.zeros(3), 0.0, C)
    assert model.history[-1] <= zero + 1e-12


def test_predict_maps_zero_score_to_positive():
    model = squared_hinge_fit(np.zeros((4, 1)), np.array([1.0, 1.0, -1.0, -1.0]), 1.0)
    np.testing.assert_array_equal(predict(model, np.zeros((2, 1))), [1.0, 1.0])


def test_metrics():
    assert relative_regression_error([3.0, 4.0], [3.0, 4.0]) == 0.0
    assert relative_regression_error([3.0, 4.0], [0.0, 0.0]) == 1.0
    assert classification_error([1, -1, 1, 1], [1, 1, 1, -1]) == 0.5
    with pytest.raises(UndefinedMetricError):
        relative_regression_error([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(DimensionMismatchError):
        classification_error([1, 1], [1])


def test_cv_regression_picks_min_mse():
    rng = np.random.default_rng(0)
    Z = rng.standard_normal((60, 5))
    y = Z @ rng.standard_normal(5) + 0.1 * rng.standard_normal(60)
    res = cross_validate(Z, y, folds=5, objective=SQUARED_LOSS, seed=1)
    assert set(res.scores) == set(REGULARIZATION_GRID)
    assert res.scores[res.best] == min(res.scores.values())
    assert res.best <= 1.0


def test_cv_ties_prefer_strong_regularisation():
    Z, y = blobs(6, shift=8.0)
    res = cross_validate(Z, y, grid=(0.25, 1.0, 4.0), objective=SQUARED_HINGE, seed=0)
    assert all(v == 0.0 for v in res.scores.values())
    assert res.best == 0.25
    Zr = np.random.default_rng(0).standard_normal((20, 2))
    res = cross_validate(Zr, np.full(20, 1.0), grid=(0.5, 2.0), objective=SQUARED_LOSS)
    assert res.best == 2.0


def test_cv_fold_validation():
    with pytest.raises(InvalidFoldsError):
        cross_validate(np.ones((3, 1)), np.ones(3), folds=4)
    with pytest.raises(InvalidFoldsError):
        cross_validate(np.ones((3, 1)), np.ones(3), folds=1)


def test_ridge_regressor_estimator():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((40, 3))
    y = X @ [1.0, 2.0, 3.0] + 1.0
    est = RidgeRegressor(alpha=1e-8).fit(X, y)
    assert est.score(X, y) > 0.999999
    assert est.get_params() == {"alpha": 1e-8}


def test_classifier_maps_arbitrary_labels():
    Z, y = blobs(7, shift=4.0)
    labels = np.where(y > 0, "yes", "no")
    clf = SquaredHingeClassifier(C=1.0).fit(Z, labels)
    assert list(clf.classes_) == ["no", "yes"]
    assert set(clf.predict(Z)) <= {"no", "yes"}
    assert clf.score(Z, labels) > 0.95


def test_classifier_requires_two_classes():
    with pytest.raises(LabelDomainError):
        SquaredHingeClassifier().fit(np.ones((4, 2)), np.ones(4))
