"""Multivariate calibration: PCR, single-response PLSR (NIPALS) and ridge.

Every regressor takes a ``preprocessing`` name. Row-wise steps (polynomial
baseline removal, vector normalisation) run first, then the column step
(mean centering or autoscaling) learned on the training rows. Without a
column step the model has no intercept: it regresses the raw response on
the raw spectra through the origin.
"""
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin, clone
from sklearn.utils.validation import check_is_fitted

from ._validation import as_matrix, as_vector, check_positive_int
from .exceptions import (
    DegenerateComponent,
    DegenerateSlope,
    InvalidArgument,
    NumericalFailure,
)
from .metrics import r2, rmse
from .preprocess import AUTOSCALE, MEAN_CENTER, PolyBaseline, Scaler, _unit_rows

PREPROCESSING = (
    "none",
    "mean-centering",
    "autoscaling",
    "poly09",
    "poly09+mean-centering",
    "poly09+autoscaling",
    "poly09+vector",
    "poly09+vector+mean-centering",
)


class SpectralPreprocessor(BaseEstimator, TransformerMixin):
    """Chain of the named preprocessing steps, e.g. ``"poly09+vector+mean-centering"``."""

    def __init__(self, variant="mean-centering"):
        self.variant = variant

    def _steps(self):
        if self.variant not in PREPROCESSING:
            raise InvalidArgument(
                f"unknown preprocessing {self.variant!r}; choose from {list(PREPROCESSING)}"
            )
        return [] if self.variant == "none" else self.variant.split("+")

    @property
    def centers(self):
        steps = self._steps()
        return "mean-centering" in steps or "autoscaling" in steps

    def _rowwise(self, X):
        steps = self._steps()
        if "poly09" in steps:
            X = self.baseline_.transform(X)
        if "vector" in steps:
            X = _unit_rows(X)
        return X

    def fit(self, X, y=None):
        self.fit_transform(X)
        return self

    def fit_transform(self, X, y=None):
        X = as_matrix(X)
        steps = self._steps()
        self.n_features_in_ = X.shape[1]
        self.baseline_ = PolyBaseline(9).fit(X)
        Z = self._rowwise(X)
        self.scaler_ = None
        if "mean-centering" in steps:
            self.scaler_ = Scaler(MEAN_CENTER).fit(Z)
        elif "autoscaling" in steps:
            self.scaler_ = Scaler(AUTOSCALE).fit(Z)
        return Z if self.scaler_ is None else self.scaler_.transform(Z)

    def transform(self, X):
        check_is_fitted(self, "baseline_")
        Z = self._rowwise(as_matrix(X, self.n_features_in_))
        return Z if self.scaler_ is None else self.scaler_.transform(Z)


class _LinearCalibration(RegressorMixin, BaseEstimator):
    """Shared plumbing: preprocess, centre ``y`` when ``X`` is centred, predict linearly."""

    def fit(self, X, y):
        X = as_matrix(X)
        y = as_vector(y, X.shape[0])
        self.preprocessor_ = SpectralPreprocessor(self.preprocessing)
        Z = self.preprocessor_.fit_transform(X)
        self.y_mean_ = float(y.mean()) if self.preprocessor_.centers else 0.0
        self.n_features_in_ = X.shape[1]
        self.coef_ = self._solve(Z, y - self.y_mean_)
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        Z = self.preprocessor_.transform(as_matrix(X, self.n_features_in_))
        return Z @ self.coef_ + self.y_mean_


class PLSRegressor(_LinearCalibration):
    """Single-response partial least squares fitted by NIPALS.

    Per latent variable: ``w = X'y / |X'y|``, ``t = X w``,
    ``p = X't / t't``, ``q = y't / t't``, then ``X -= t p'`` and ``y -= q t``.
    The coefficients in preprocessed space are ``W (P'W)^-1 q``.

    Attributes
    ----------
    x_weights_, x_loadings_ : ndarray of shape (n_features, n_latent)
    y_loadings_ : ndarray of shape (n_latent,)
    x_scores_ : ndarray of shape (n_samples, n_latent)
    explained_variance_ratio_ : ndarray of shape (n_latent,)
        Share of the preprocessed X sum of squares removed by each component.
    """

    def __init__(self, n_latent=5, preprocessing="mean-centering"):
        self.n_latent = n_latent
        self.preprocessing = preprocessing

    def _solve(self, X, y):
        A = check_positive_int(self.n_latent, "n_latent")
        if A > min(X.shape):
            raise InvalidArgument(f"n_latent={A} exceeds min(n_samples, n_features)={min(X.shape)}")
        n, d = X.shape
        W = np.zeros((d, A))
        P = np.zeros((d, A))
        T = np.zeros((n, A))
        q = np.zeros(A)
        Xk = X.copy()
        yk = y.copy()
        total_ss = np.sum(X * X)
        removed = np.zeros(A)
        for a in range(A):
            w = Xk.T @ yk
            norm = np.linalg.norm(w)
            if norm < 1e-12:
                raise DegenerateComponent(a)
            w /= norm
            t = Xk @ w
            tt = t @ t
            p = Xk.T @ t / tt
            q[a] = yk @ t / tt
            Xk -= np.outer(t, p)
            yk = yk - q[a] * t
            W[:, a], P[:, a], T[:, a] = w, p, t
            removed[a] = tt * (p @ p)
        self.x_weights_, self.x_loadings_, self.y_loadings_, self.x_scores_ = W, P, q, T
        self.explained_variance_ratio_ = removed / total_ss if total_ss > 0 else removed
        try:
            return W @ np.linalg.solve(P.T @ W, q)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("P'W is singular") from exc


class PCRegressor(_LinearCalibration):
    """Least squares on the leading principal-component scores."""

    def __init__(self, n_components=6, preprocessing="mean-centering"):
        self.n_components = n_components
        self.preprocessing = preprocessing

    def _solve(self, X, y):
        k = check_positive_int(self.n_components, "n_components")
        if k > min(X.shape):
            raise InvalidArgument(f"n_components={k} exceeds min(n_samples, n_features)={min(X.shape)}")
        _, s, vt = np.linalg.svd(X, full_matrices=False)
        if s[k - 1] <= 1e-12 * max(s[0], 1e-300):
            raise NumericalFailure(f"component {k - 1} has no variance; scores are rank deficient")
        V = vt[:k].T
        T = X @ V
        gamma = np.linalg.solve(T.T @ T, T.T @ y)
        self.components_ = vt[:k]
        self.score_coef_ = gamma
        sq = s ** 2
        self.explained_variance_ratio_ = sq[:k] / sq.sum()
        return V @ gamma


class RidgeRegressor(_LinearCalibration):
    """``beta = (X'X + k I)^-1 X'y`` on the preprocessed (by default centred) data."""

    def __init__(self, k=0.1, preprocessing="mean-centering"):
        self.k = k
        self.preprocessing = preprocessing

    def _solve(self, X, y):
        if not self.k >= 0:
            raise InvalidArgument("ridge penalty k must be >= 0")
        u, s, vt = np.linalg.svd(X, full_matrices=False)
        if self.k == 0:
            # X'X must be invertible: full column rank
            if X.shape[0] < X.shape[1] or s[-1] <= 1e-10 * s[0]:
                raise NumericalFailure("X'X is singular; use k > 0")
        shrink = s / (s ** 2 + self.k)
        return vt.T @ (shrink * (u.T @ y))

    @property
    def intercept_(self):
        check_is_fitted(self, "coef_")
        if self.preprocessor_.variant != "mean-centering":
            raise InvalidArgument("a raw-space intercept is only defined for plain mean centering")
        return self.y_mean_ - self.preprocessor_.scaler_.column_means_ @ self.coef_


def venetian_blinds_folds(n_samples, n_folds=5):
    """Fold index ``i mod n_folds`` for each sample, in dataset order."""
    if isinstance(n_folds, bool) or int(n_folds) != n_folds or n_folds < 2:
        raise InvalidArgument("n_folds must be an integer >= 2")
    n_samples = check_positive_int(n_samples, "n_samples")
    if n_samples < n_folds:
        raise InvalidArgument(f"{n_samples} samples cannot fill {n_folds} folds")
    return np.arange(n_samples) % int(n_folds)


def cross_val_predict_blinds(estimator, X, y, n_folds=5):
    """Out-of-fold predictions with venetian-blinds folds."""
    X = as_matrix(X)
    y = as_vector(y, X.shape[0])
    folds = venetian_blinds_folds(X.shape[0], n_folds)
    pred = np.empty(X.shape[0])
    for f in range(int(n_folds)):
        test = folds == f
        model = clone(estimator).fit(X[~test], y[~test])
        pred[test] = model.predict(X[test])
    return pred


def detection_limit(y_true, y_pred):
    """``3.3 * sigma / S`` from the OLS line ``y_pred = S y_true + b``.

    ``sigma`` is the residual standard deviation with ``n - 2`` degrees of freedom.
    """
    y_true = as_vector(y_true, name="y_true")
    y_pred = as_vector(y_pred, y_true.shape[0], name="y_pred")
    n = y_true.shape[0]
    if n < 3:
        raise InvalidArgument("detection limit needs at least 3 points")
    xc = y_true - y_true.mean()
    sxx = xc @ xc
    if sxx == 0:
        raise InvalidArgument("y_true needs at least 2 distinct values")
    slope = (xc @ (y_pred - y_pred.mean())) / sxx
    if abs(slope) < 1e-12:
        raise DegenerateSlope("calibration slope is zero")
    intercept = y_pred.mean() - slope * y_true.mean()
    resid = y_pred - (slope * y_true + intercept)
    sigma = np.sqrt(resid @ resid / (n - 2))
    return float(3.3 * sigma / abs(slope))


@dataclass(frozen=True)
class CalibrationReport:
    r2_train: float
    rmse_train: float
    r2_cv: float
    rmse_cv: float
    r2_test: float
    rmse_test: float
    lod: float

    # column order of the calibration tables
    COLUMNS = ("R2_T", "RMSE_T", "R2_C", "RMSE_C", "R2_P", "RMSE_P", "LOD")

    def values(self):
        return [self.r2_train, self.rmse_train, self.r2_cv, self.rmse_cv,
                self.r2_test, self.rmse_test, self.lod]

    def to_dict(self):
        return asdict(self)


def calibrate(estimator, X_train, y_train, X_test, y_test, n_folds=5):
    """Fit, cross-validate with venetian blinds and score a regressor.

    Returns ``(fitted_estimator, CalibrationReport)``; the detection limit is
    taken from the test-set predictions.
    """
    model = clone(estimator).fit(X_train, y_train)
    p_train = model.predict(X_train)
    p_cv = cross_val_predict_blinds(estimator, X_train, y_train, n_folds)
    p_test = model.predict(X_test)
    report = CalibrationReport(
        r2_train=r2(y_train, p_train),
        rmse_train=rmse(y_train, p_train),
        r2_cv=r2(y_train, p_cv),
        rmse_cv=rmse(y_train, p_cv),
        r2_test=r2(y_test, p_test),
        rmse_test=rmse(y_test, p_test),
        lod=detection_limit(y_test, p_test),
    )
    return model, report
