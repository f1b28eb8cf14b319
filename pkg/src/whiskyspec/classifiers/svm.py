"""One-vs-rest support vector machines: linear (sub-gradient) and RBF (SMO)."""
import numpy as np

from .._validation import check_positive_int
from ..exceptions import InvalidArgument
from ._base import BaseClassifier


def _one_vs_rest_targets(y, n_classes):
    Y = -np.ones((y.size, n_classes))
    Y[np.arange(y.size), y] = 1.0
    return Y


class LinearSVMClassifier(BaseClassifier):
    """L2-regularised hinge loss, one binary machine per class.

    The bias is learned as the weight of a constant feature equal to
    ``intercept_scaling``. Full-batch sub-gradient descent on
    ``lam/2 |w|^2 + mean(hinge)`` with ``lam = 1 / (C n)`` and step
    ``1 / (lam t)``, followed by projection onto the ball of radius
    ``1 / sqrt(lam)`` that contains the optimum.
    """

    def __init__(self, C=1.0, intercept_scaling=1000.0, n_passes=2000):
        self.C = C
        self.intercept_scaling = intercept_scaling
        self.n_passes = n_passes

    def _fit(self, X, y):
        if not self.C > 0:
            raise InvalidArgument("C must be > 0")
        passes = check_positive_int(self.n_passes, "n_passes")
        n = X.shape[0]
        Xa = np.hstack([X, np.full((n, 1), float(self.intercept_scaling))])
        Y = _one_vs_rest_targets(y, self.n_classes_)
        lam = 1.0 / (self.C * n)
        radius = 1.0 / np.sqrt(lam)
        W = np.zeros((Xa.shape[1], self.n_classes_))
        for t in range(1, passes + 1):
            active = (Y * (Xa @ W)) < 1.0
            grad = lam * W - Xa.T @ (Y * active) / n
            W -= grad / (lam * t)
            norms = np.linalg.norm(W, axis=0)
            W *= np.minimum(1.0, radius / np.maximum(norms, 1e-300))
        self.coef_ = W[:-1].T.copy()
        self.intercept_ = W[-1] * float(self.intercept_scaling)

    def decision_function(self, X):
        X = self._check_X(X)
        return X @ self.coef_.T + self.intercept_

    _scores = decision_function


def rbf_kernel(A, B, gamma):
    d2 = (np.einsum("ij,ij->i", A, A)[:, None] - 2.0 * A @ B.T
          + np.einsum("ij,ij->i", B, B)[None, :])
    return np.exp(-gamma * np.maximum(d2, 0.0))


def smo_binary(K, y, C, tol=1e-3, max_iter=100000):
    """Solve the soft-margin SVM dual for labels ``y`` in {-1, +1}.

    Working pairs are chosen as the maximal KKT violators. Returns
    ``(alpha, b, n_iter)`` with decision ``sum_i alpha_i y_i K(x_i, x) + b``.
    """
    n = y.size
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of 0.5 a'Qa - e'a
    diag = np.diag(K)
    it = 0
    while it < max_iter:
        score = -y * G
        up = ((alpha < C) & (y > 0)) | ((alpha > 0) & (y < 0))
        low = ((alpha < C) & (y < 0)) | ((alpha > 0) & (y > 0))
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = score[i] - score[j]
        if gap < tol:
            break
        curv = max(diag[i] + diag[j] - 2.0 * K[i, j], 1e-12)
        room_i = C - alpha[i] if y[i] > 0 else alpha[i]
        room_j = alpha[j] if y[j] > 0 else C - alpha[j]
        step = min(gap / curv, room_i, room_j)
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        G += step * y * (K[:, i] - K[:, j])
        it += 1
    np.clip(alpha, 0.0, C, out=alpha)
    score = -y * G
    free = (alpha > 1e-12) & (alpha < C - 1e-12)
    if np.any(free):
        b = float(np.mean(score[free]))
    else:
        up = ((alpha < C) & (y > 0)) | ((alpha > 0) & (y < 0))
        low = ((alpha < C) & (y < 0)) | ((alpha > 0) & (y > 0))
        b = 0.5 * (np.max(score[up]) + np.min(score[low]))
    return alpha, b, it


class RbfSVMClassifier(BaseClassifier):
    """Gaussian-kernel SVM, one-vs-rest, trained by SMO.

    ``gamma="auto"`` means ``1 / n_features``.
    """

    def __init__(self, C=1.0, gamma="auto", tol=1e-3, max_iter=100000):
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter

    def _fit(self, X, y):
        if not self.C > 0:
            raise InvalidArgument("C must be > 0")
        if self.gamma == "auto":
            self.gamma_ = 1.0 / X.shape[1]
        elif isinstance(self.gamma, (int, float)) and self.gamma > 0:
            self.gamma_ = float(self.gamma)
        else:
            raise InvalidArgument(f"gamma must be 'auto' or > 0, got {self.gamma!r}")
        K = rbf_kernel(X, X, self.gamma_)
        Y = _one_vs_rest_targets(y, self.n_classes_)
        dual = np.zeros((self.n_classes_, X.shape[0]))
        self.intercept_ = np.zeros(self.n_classes_)
        self.n_iter_ = []
        for c in range(self.n_classes_):
            alpha, b, it = smo_binary(K, Y[:, c], float(self.C), self.tol, self.max_iter)
            dual[c] = alpha * Y[:, c]
            self.intercept_[c] = b
            self.n_iter_.append(it)
        keep = np.flatnonzero(np.any(dual != 0, axis=0))
        self.support_vectors_ = X[keep]
        self.dual_coef_ = dual[:, keep]

    def decision_function(self, X):
        X = self._check_X(X)
        if self.support_vectors_.shape[0] == 0:
            return np.tile(self.intercept_, (X.shape[0], 1))
        K = rbf_kernel(X, self.support_vectors_, self.gamma_)
        return K @ self.dual_coef_.T + self.intercept_

    _scores = decision_function
