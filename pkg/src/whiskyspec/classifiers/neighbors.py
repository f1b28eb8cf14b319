import numpy as np

from .._validation import check_positive_int
from ._base import BaseClassifier

_BLOCK_FLOATS = 1 << 24


class KNNClassifier(BaseClassifier):
    """k-nearest-neighbour vote under the Euclidean metric.

    Distance ties resolve to the training sample with the lowest index and
    vote ties to the lowest class index.
    """

    def __init__(self, n_neighbors=1):
        self.n_neighbors = n_neighbors

    def _fit(self, X, y):
        check_positive_int(self.n_neighbors, "n_neighbors")
        self.X_train_ = X.copy()
        self.y_train_ = y.copy()

    def _neighbors(self, X):
        n_train, d = self.X_train_.shape
        k = min(int(self.n_neighbors), n_train)
        # direct differences rather than |a|^2 - 2ab + |b|^2, which cancels
        # badly for nearby rows; chunk so each block stays around 16M floats
        chunk = max(1, _BLOCK_FLOATS // max(1, n_train * d))
        out = np.empty((X.shape[0], k), dtype=np.int64)
        for start in range(0, X.shape[0], chunk):
            diff = X[start:start + chunk, None, :] - self.X_train_[None, :, :]
            d2 = np.einsum("ijk,ijk->ij", diff, diff)
            # stable sort keeps the lower sample index first on equal distance
            out[start:start + chunk] = np.argsort(d2, axis=1, kind="stable")[:, :k]
        return out

    def predict_proba(self, X):
        X = self._check_X(X)
        votes = self.y_train_[self._neighbors(X)]
        counts = np.zeros((X.shape[0], self.n_classes_))
        for j in range(votes.shape[1]):
            np.add.at(counts, (np.arange(X.shape[0]), votes[:, j]), 1.0)
        return counts / counts.sum(axis=1, keepdims=True)

    def _scores(self, X):
        return self.predict_proba(X)
