"""Gaussian discriminant classifiers with trace-scaled ridge regularisation."""
import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from ..exceptions import NumericalFailure
from ._base import BaseClassifier, softmax_rows


def _ridge(cov, reg):
    d = cov.shape[0]
    lam = reg * np.trace(cov) / d
    # an all-constant class still needs a usable covariance
    if lam <= 0:
        lam = reg
    out = cov.copy()
    out[np.diag_indices(d)] += lam
    return out


def _cholesky(cov, what):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"{what} covariance is not positive definite") from exc


def _class_stats(X, y, n_classes):
    means = np.vstack([X[y == c].mean(axis=0) for c in range(n_classes)])
    counts = np.bincount(y, minlength=n_classes)
    return means, counts


class LDAClassifier(BaseClassifier):
    """Linear discriminant analysis on the pooled within-class covariance.

    The covariance gets ``reg * trace / d`` added to its diagonal before it
    is inverted.
    """

    _min_per_class = 2

    def __init__(self, reg=1e-6):
        self.reg = reg

    def _fit(self, X, y):
        C = self.n_classes_
        self.means_, counts = _class_stats(X, y, C)
        self.priors_ = counts / counts.sum()
        resid = X - self.means_[y]
        pooled = resid.T @ resid / (X.shape[0] - C)
        self.covariance_ = _ridge(pooled, self.reg)
        self._prepare()

    def _prepare(self):
        try:
            factor = cho_factor(self.covariance_, lower=True)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("pooled covariance is not positive definite") from exc
        W = cho_solve(factor, self.means_.T)
        self.coef_ = W.T
        self.intercept_ = -0.5 * np.sum(self.means_ * self.coef_, axis=1) + np.log(self.priors_)

    def decision_function(self, X):
        X = self._check_X(X)
        return X @ self.coef_.T + self.intercept_

    _scores = decision_function

    def predict_proba(self, X):
        return softmax_rows(self.decision_function(X))


class QDAClassifier(BaseClassifier):
    """Quadratic discriminant analysis with one regularised covariance per class.

    The score of class ``c`` is ``-0.5 * Mahalanobis^2 - 0.5 * log|S_c| + log p_c``.
    Only the centred training rows of each class are kept as fitted state;
    the Cholesky factors are rebuilt from them on demand.
    """

    _min_per_class = 2

    def __init__(self, reg=1e-6):
        self.reg = reg

    def _fit(self, X, y):
        C = self.n_classes_
        self.means_, counts = _class_stats(X, y, C)
        self.priors_ = counts / counts.sum()
        self.deviations_ = [X[y == c] - self.means_[c] for c in range(C)]
        self._factors = None

    def _get_factors(self):
        if getattr(self, "_factors", None) is None:
            factors = []
            for c, Z in enumerate(self.deviations_):
                cov = _ridge(Z.T @ Z / (Z.shape[0] - 1), self.reg)
                L = _cholesky(cov, f"class {self.classes_[c]!r}")
                factors.append((L, np.sum(np.log(np.diag(L)))))
            self._factors = factors
        return self._factors

    def decision_function(self, X):
        X = self._check_X(X)
        scores = np.empty((X.shape[0], self.n_classes_))
        for c, (L, half_logdet) in enumerate(self._get_factors()):
            r = solve_triangular(L, (X - self.means_[c]).T, lower=True)
            scores[:, c] = -0.5 * np.sum(r * r, axis=0) - half_logdet + np.log(self.priors_[c])
        return scores

    _scores = decision_function

    def predict_proba(self, X):
        return softmax_rows(self.decision_function(X))
