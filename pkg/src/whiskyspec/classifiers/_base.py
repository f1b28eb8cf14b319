import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import as_labels, as_matrix
from ..exceptions import InsufficientClassData, InvalidArgument


class BaseClassifier(ClassifierMixin, BaseEstimator):
    """Label encoding and width checks shared by every classifier.

    Subclasses implement ``_fit(X, y_encoded)`` and either ``_scores`` (higher
    wins) or ``_predict_encoded``. Ties go to the lowest class index because
    :func:`numpy.argmax` returns the first maximum.
    """

    _min_per_class = 1

    def fit(self, X, y):
        X = as_matrix(X)
        y, classes = as_labels(y, X.shape[0])
        if classes.size < 2:
            raise InvalidArgument("need at least 2 classes")
        counts = np.bincount(y, minlength=classes.size)
        if counts.min() < self._min_per_class:
            c = int(np.argmin(counts))
            raise InsufficientClassData(
                f"class {classes[c]!r} has {counts[c]} sample(s); "
                f"{type(self).__name__} needs {self._min_per_class}"
            )
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        self._fit(X, y)
        return self

    def _check_X(self, X):
        check_is_fitted(self, "classes_")
        return as_matrix(X, self.n_features_in_)

    @property
    def n_classes_(self):
        return len(self.classes_)

    def _predict_encoded(self, X):
        return np.argmax(self._scores(X), axis=1)

    def predict(self, X):
        X = self._check_X(X)
        return self.classes_[self._predict_encoded(X)]


def softmax_rows(scores):
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)
