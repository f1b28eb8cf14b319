import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from whiskyspec.core import dataset_to_matrix
from whiskyspec.exceptions import DegenerateComponent, DegenerateSlope, InvalidArgument, NumericalFailure
from whiskyspec.harness import holdout_split
from whiskyspec.regression import (
    PREPROCESSING,
    CalibrationReport,
    PCRegressor,
    PLSRegressor,
    RidgeRegressor,
    SpectralPreprocessor,
    calibrate,
    cross_val_predict_blinds,
    detection_limit,
    venetian_blinds_folds,
)
from whiskyspec.synthgen import synth_paper_shaped_dataset

FIXED_6x4 = [
    [1.0, 2.0, 0.5, 3.0],
    [2.0, 1.0, 1.5, 2.0],
    [3.0, 4.0, 2.0, 1.0],
    [4.0, 3.0, 3.5, 0.5],
    [5.0, 6.0, 4.0, 2.5],
    [6.0, 5.0, 5.5, 1.5],
]
FIXED_6_Y = [1.2, 1.9, 3.4, 3.9, 5.6, 6.1]
# from the scalar-loop NIPALS below, 2 latent variables, mean centred
FIXED_PLS2_COEF = [0.38572973170080677, 0.35152345455159095, 0.35763474044146504, -0.02332525835413648]
FIXED_PLS2_INTERCEPT = 0.13046795231886232


def nipals_with_loops(X, y, n_latent):
    """Straight-line NIPALS on Python lists; returns raw-space (coef, intercept)."""
    n, d = len(X), len(X[0])
    xm = [sum(X[i][j] for i in range(n)) / n for j in range(d)]
    ym = sum(y) / n
    E = [[X[i][j] - xm[j] for j in range(d)] for i in range(n)]
    f = [v - ym for v in y]
    W, P, Q = [], [], []
    for _ in range(n_latent):
        w = [sum(E[i][j] * f[i] for i in range(n)) for j in range(d)]
        norm = sum(v * v for v in w) ** 0.5
        w = [v / norm for v in w]
        t = [sum(E[i][j] * w[j] for j in range(d)) for i in range(n)]
        tt = sum(v * v for v in t)
        p = [sum(E[i][j] * t[i] for i in range(n)) / tt for j in range(d)]
        q = sum(f[i] * t[i] for i in range(n)) / tt
        for i in range(n):
            for j in range(d):
                E[i][j] -= t[i] * p[j]
            f[i] -= q * t[i]
        W.append(w)
        P.append(p)
        Q.append(q)
    A = n_latent
    M = [[sum(P[r][j] * W[c][j] for j in range(d)) for c in range(A)] for r in range(A)]
    rhs = list(Q)
    for c in range(A):
        for r in range(c + 1, A):
            fac = M[r][c] / M[c][c]
            for k in range(c, A):
                M[r][k] -= fac * M[c][k]
            rhs[r] -= fac * rhs[c]
    z = [0.0] * A
    for r in reversed(range(A)):
        z[r] = (rhs[r] - sum(M[r][k] * z[k] for k in range(r + 1, A))) / M[r][r]
    coef = [sum(W[a][j] * z[a] for a in range(A)) for j in range(d)]
    return coef, ym - sum(coef[j] * xm[j] for j in range(d))


def _raw_intercept(model):
    return model.y_mean_ - model.preprocessor_.scaler_.column_means_ @ model.coef_


@pytest.mark.parametrize("n_latent", [1, 2, 3])
def test_plsr_matches_loop_oracle(n_latent):
    model = PLSRegressor(n_latent).fit(np.array(FIXED_6x4), np.array(FIXED_6_Y))
    coef, intercept = nipals_with_loops(FIXED_6x4, FIXED_6_Y, n_latent)
    np.testing.assert_allclose(model.coef_, coef, atol=1e-8)
    assert _raw_intercept(model) == pytest.approx(intercept, abs=1e-8)


def test_plsr_frozen_two_component_coefficients():
    model = PLSRegressor(2).fit(np.array(FIXED_6x4), np.array(FIXED_6_Y))
    np.testing.assert_allclose(model.coef_, FIXED_PLS2_COEF, atol=1e-8)
    assert _raw_intercept(model) == pytest.approx(FIXED_PLS2_INTERCEPT, abs=1e-8)


def test_plsr_orthogonal_design_recovers_coefficient():
    q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(10, 3)))
    y = 2.5 * q[:, 0]
    model = PLSRegressor(1, preprocessing="none").fit(q, y)
    np.testing.assert_allclose(model.coef_, [2.5, 0.0, 0.0], atol=1e-10)


def test_plsr_degenerate_component_index():
    X = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    y = np.array([0.0, 0.0, 1.0])
    with pytest.raises(DegenerateComponent) as err:
        PLSRegressor(1, preprocessing="none").fit(X, y)
    assert err.value.index == 0


def test_plsr_too_many_latent_variables():
    with pytest.raises(InvalidArgument):
        PLSRegressor(7).fit(np.array(FIXED_6x4), np.array(FIXED_6_Y))


def test_ridge_zero_penalty_is_ols():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 5))
    y = X @ [1.0, -2.0, 0.5, 0.0, 3.0] + 0.1 * rng.normal(size=30)
    model = RidgeRegressor(0.0).fit(X, y)
    Z = np.hstack([np.ones((30, 1)), X])
    ols = np.linalg.lstsq(Z, y, rcond=None)[0]
    np.testing.assert_allclose(model.coef_, ols[1:], atol=1e-8)
    assert model.intercept_ == pytest.approx(ols[0], abs=1e-8)


def test_ridge_hand_system():
    # (X'X + 0.1 I) beta = X'y with X'X = [[2, 1], [1, 2]] and X'y = [4, 5]
    X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    y = np.array([1.0, 2.0, 3.0])
    model = RidgeRegressor(0.1, preprocessing="none").fit(X, y)
    np.testing.assert_allclose(model.coef_, [340.0 / 341.0, 650.0 / 341.0], atol=1e-12)


def test_ridge_large_penalty_shrinks_to_zero():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(20, 3))
    y = X @ [1.0, 2.0, 3.0]
    ols = RidgeRegressor(0.0).fit(X, y).coef_
    assert np.linalg.norm(RidgeRegressor(1e9).fit(X, y).coef_) < 1e-6 * np.linalg.norm(ols)


def test_ridge_singular_without_penalty():
    X = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(NumericalFailure):
        RidgeRegressor(0.0).fit(X, [1.0, 2.0, 3.0])
    with pytest.raises(InvalidArgument):
        RidgeRegressor(-1.0).fit(X, [1.0, 2.0, 3.0])


def test_pcr_exact_for_rank_r_linear_response():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(25, 2)) @ rng.normal(size=(2, 6))
    y = X @ rng.normal(size=6)
    model = PCRegressor(2).fit(X, y)
    resid = y - model.predict(X)
    assert 1 - resid @ resid / np.sum((y - y.mean()) ** 2) == pytest.approx(1.0, abs=1e-10)


def test_pcr_one_component_is_ols_on_first_score():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(40, 2)) * [5.0, 0.5]
    y = X @ [0.7, 2.0] + rng.normal(size=40)
    Z = X - X.mean(axis=0)
    w, V = np.linalg.eigh(Z.T @ Z)
    t = Z @ V[:, np.argmax(w)]
    slope = (t @ (y - y.mean())) / (t @ t)
    expected = y.mean() + slope * t
    np.testing.assert_allclose(PCRegressor(1).fit(X, y).predict(X), expected, atol=1e-10)


def test_pcr_rank_deficient_scores():
    X = np.outer(np.arange(6.0), [1.0, 2.0, 3.0])
    with pytest.raises(NumericalFailure):
        PCRegressor(2).fit(X, np.arange(6.0))


def test_venetian_blinds_pattern():
    assert venetian_blinds_folds(10, 5).tolist() == [0, 1, 2, 3, 4, 0, 1, 2, 3, 4]
    with pytest.raises(InvalidArgument):
        venetian_blinds_folds(10, 1)
    with pytest.raises(InvalidArgument):
        venetian_blinds_folds(3, 5)


def test_cross_val_predictions_are_out_of_fold():
    X = np.array(FIXED_6x4 * 2) + np.arange(12)[:, None] * 0.01
    y = np.array(FIXED_6_Y * 2)
    pred = cross_val_predict_blinds(PLSRegressor(1), X, y, n_folds=3)
    keep = np.arange(12) % 3 != 0
    manual = PLSRegressor(1).fit(X[keep], y[keep]).predict(X[~keep])
    np.testing.assert_allclose(pred[~keep], manual)


def test_detection_limit_perfect_predictions():
    y = np.linspace(0.0, 3.0, 11)
    assert detection_limit(y, y) == 0.0


def test_detection_limit_constructed_statistics():
    # residuals orthogonal to [1, y] so the fitted slope stays exactly 1,
    # scaled to a residual standard deviation of 0.05 on n - 2 dof
    y = np.repeat(np.linspace(0.0, 3.0, 11), 4)
    basis = np.column_stack([np.ones_like(y), y])
    r = np.random.default_rng(7).normal(size=y.size)
    r -= basis @ np.linalg.lstsq(basis, r, rcond=None)[0]
    r *= 0.05 / np.sqrt(r @ r / (y.size - 2))
    assert detection_limit(y, y + r) == pytest.approx(0.165, abs=1e-12)


def test_detection_limit_flat_calibration():
    with pytest.raises(DegenerateSlope):
        detection_limit([0.0, 1.0, 2.0, 3.0], [1.0, 1.0, 1.0, 1.0])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(-5.0, 5.0), st.integers(0, 10_000))
def test_detection_limit_invariant_to_affine_response(slope, offset, seed):
    y = np.linspace(0.0, 3.0, 20)
    pred = y + 0.03 * np.random.default_rng(seed).normal(size=20)
    assert detection_limit(y, slope * pred + offset) == pytest.approx(detection_limit(y, pred), rel=1e-8)


def test_preprocessing_variants_all_run():
    rng = np.random.default_rng(8)
    X = rng.random((8, 60)) + 1.0
    for v in PREPROCESSING:
        Z = SpectralPreprocessor(v).fit_transform(X)
        assert Z.shape == X.shape and np.all(np.isfinite(Z))
    with pytest.raises(InvalidArgument):
        SpectralPreprocessor("msc").fit(X)


def test_no_column_step_means_no_intercept():
    X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    model = RidgeRegressor(0.1, preprocessing="none").fit(X, [1.0, 2.0, 3.0])
    assert model.y_mean_ == 0.0
    np.testing.assert_allclose(model.predict([[0.0, 0.0]]), [0.0])


@pytest.fixture(scope="module")
def methanol():
    ds = synth_paper_shaped_dataset(preset="Methanol", seed=7)
    split = holdout_split(ds)
    X, _, _, y = dataset_to_matrix(ds)
    return X[split.train], y[split.train], X[split.test], y[split.test]


def test_pcr_six_components_on_unseen_sources(methanol):
    _, report = calibrate(PCRegressor(6), *methanol)
    assert report.r2_test >= 0.99


def test_plsr_cv_error_close_to_training_error(methanol):
    _, report = calibrate(PLSRegressor(5), *methanol)
    assert report.rmse_cv <= 2.0 * report.rmse_train
    assert list(report.to_dict()) == ["r2_train", "rmse_train", "r2_cv", "rmse_cv", "r2_test", "rmse_test", "lod"]
    assert CalibrationReport.COLUMNS == ("R2_T", "RMSE_T", "R2_C", "RMSE_C", "R2_P", "RMSE_P", "LOD")
