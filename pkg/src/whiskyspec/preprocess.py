"""Fitted spectral transforms: scaling, polynomial baseline removal and PCA."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_matrix, check_positive_int
from .exceptions import DegenerateColumn, InvalidArgument, NumericalFailure

MEAN_CENTER = "MeanCenter"
AUTOSCALE = "Autoscale"
VECTOR_NORM = "VectorNorm"
SCALER_KINDS = (MEAN_CENTER, AUTOSCALE, VECTOR_NORM)
_STD_EPS = 1e-12


class Scaler(BaseEstimator, TransformerMixin):
    """Column-wise mean centering or autoscaling, or row-wise unit-norm scaling.

    Parameters
    ----------
    kind : {"MeanCenter", "Autoscale", "VectorNorm"}
        ``VectorNorm`` is stateless: it divides each row by its L2 norm and
        ignores the fitted column statistics.
    """

    def __init__(self, kind=MEAN_CENTER):
        self.kind = kind

    def fit(self, X, y=None):
        if self.kind not in SCALER_KINDS:
            raise InvalidArgument(f"unknown scaler kind {self.kind!r}")
        X = as_matrix(X)
        self.n_features_in_ = X.shape[1]
        self.column_means_ = X.mean(axis=0)
        self.column_stds_ = None
        if self.kind == AUTOSCALE:
            std = X.std(axis=0, ddof=1) if X.shape[0] > 1 else np.zeros(X.shape[1])
            bad = np.flatnonzero(std <= _STD_EPS)
            if bad.size:
                raise DegenerateColumn(int(bad[0]))
            self.column_stds_ = std
        return self

    def transform(self, X):
        check_is_fitted(self, "column_means_")
        X = as_matrix(X, self.n_features_in_)
        if self.kind == VECTOR_NORM:
            return _unit_rows(X)
        out = X - self.column_means_
        if self.kind == AUTOSCALE:
            out /= self.column_stds_
        return out

    def inverse_transform(self, X):
        check_is_fitted(self, "column_means_")
        if self.kind == VECTOR_NORM:
            raise InvalidArgument("vector normalisation cannot be inverted")
        X = as_matrix(X, self.n_features_in_)
        if self.kind == AUTOSCALE:
            X = X * self.column_stds_
        return X + self.column_means_


def _unit_rows(X):
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0):
        raise InvalidArgument("cannot vector-normalise an all-zero row")
    return X / norms[:, None]


def fit_scaler(kind, X):
    return Scaler(kind).fit(X)


def apply_scaler(model, X):
    return model.transform(X)


def _legendre_design(n_points, order):
    x = np.linspace(-1.0, 1.0, n_points)
    return np.polynomial.legendre.legvander(x, order)


def poly_baseline(row, order=9, tol=1e-6, max_iter=100):
    """Remove a baseline by iteratively clipping the row to its polynomial fit.

    The abscissa is mapped to [-1, 1] and fitted in a Legendre basis so the
    least-squares problem stays well conditioned at high order. Each pass
    replaces the points lying above the current fit by the fit itself; the
    loop ends once no point moves by more than ``tol * max|row|``.
    Returns ``row - baseline``.
    """
    y = np.asarray(row, dtype=np.float64)
    if y.ndim != 1:
        raise InvalidArgument("poly_baseline works on a single spectrum")
    order = check_positive_int(order, "order", minimum=0)
    if y.size <= order + 1:
        raise InvalidArgument(f"need more than {order + 1} points for order {order}")
    V = _legendre_design(y.size, order)
    if np.linalg.matrix_rank(V) < order + 1:
        raise NumericalFailure("baseline design matrix is rank deficient")
    pinv = np.linalg.pinv(V)
    scale = np.max(np.abs(y))
    if scale == 0:
        return np.zeros_like(y)
    work = y.copy()
    fit = V @ (pinv @ work)
    for _ in range(max_iter):
        clipped = np.minimum(work, fit)
        change = np.max(np.abs(clipped - work))
        work = clipped
        fit = V @ (pinv @ work)
        if change < tol * scale:
            break
    if not np.all(np.isfinite(fit)):
        raise NumericalFailure("baseline fit produced non-finite values")
    return y - fit


class PolyBaseline(BaseEstimator, TransformerMixin):
    """Row-wise :func:`poly_baseline` as a (stateless) transformer."""

    def __init__(self, order=9):
        self.order = order

    def fit(self, X, y=None):
        X = as_matrix(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = as_matrix(X, self.n_features_in_)
        return np.vstack([poly_baseline(r, self.order) for r in X])


class PCA(BaseEstimator, TransformerMixin):
    """Principal components from the SVD of the centred training matrix.

    Each component is flipped so its largest-magnitude loading is positive,
    which makes the basis independent of the SVD routine's sign choices.

    Attributes
    ----------
    mean_ : ndarray of shape (n_features,)
    components_ : ndarray of shape (n_components, n_features)
        Orthonormal rows.
    explained_variance_ : ndarray of shape (n_components,)
        Sample variance (``n - 1`` denominator) along each component.
    explained_variance_ratio_ : ndarray of shape (n_components,)
    """

    def __init__(self, n_components=6):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = as_matrix(X)
        n, d = X.shape
        k = check_positive_int(self.n_components, "n_components")
        if k > min(n - 1, d):
            raise InvalidArgument(f"n_components={k} outside [1, {min(n - 1, d)}]")
        self.mean_ = X.mean(axis=0)
        _, s, vt = np.linalg.svd(X - self.mean_, full_matrices=False)
        comps = vt[:k]
        lead = np.argmax(np.abs(comps), axis=1)
        signs = np.sign(comps[np.arange(k), lead])
        self.components_ = comps * signs[:, None]
        var = s ** 2 / (n - 1)
        self.explained_variance_ = var[:k]
        total = var.sum()
        self.explained_variance_ratio_ = var[:k] / total if total > 0 else np.zeros(k)
        self.n_features_in_ = d
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = as_matrix(X, self.n_features_in_)
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, scores):
        check_is_fitted(self, "components_")
        scores = as_matrix(scores, self.components_.shape[0], name="scores")
        return scores @ self.components_ + self.mean_


def pca_fit(X, k):
    return PCA(k).fit(X)


def pca_transform(model, X):
    return model.transform(X)


def pca_inverse(model, scores):
    return model.inverse_transform(scores)
