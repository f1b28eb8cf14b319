import numpy as np

from .._random import rng_for
from .._validation import check_positive_int
from ..exceptions import InvalidArgument
from ._base import BaseClassifier
from .forest import grow_tree


class AdaBoostClassifier(BaseClassifier):
    """Multi-class AdaBoost (SAMME) over depth-1 Gini stumps.

    Boosting stops early when a stump fits the weighted data perfectly or
    does no better than chance (error >= 1 - 1/K).
    """

    def __init__(self, n_estimators=50, learning_rate=1.0, seed=0):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.seed = seed

    def _fit(self, X, y):
        rounds = check_positive_int(self.n_estimators, "n_estimators")
        if not self.learning_rate > 0:
            raise InvalidArgument("learning_rate must be > 0")
        n, d = X.shape
        K = self.n_classes_
        w = np.full(n, 1.0 / n)
        self.stumps_, self.alphas_, self.errors_ = [], [], []
        rng = rng_for(self.seed, "adaboost")
        for _ in range(rounds):
            stump = grow_tree(X, y, K, d, rng, max_depth=1, sample_weight=w)
            miss = np.argmax(stump.predict_value(X), axis=1) != y
            err = float(np.sum(w[miss]) / np.sum(w))
            if err >= 1.0 - 1.0 / K:
                if not self.stumps_:
                    self.stumps_.append(stump)
                    self.alphas_.append(1.0)
                    self.errors_.append(err)
                break
            if err <= 0.0:
                self.stumps_.append(stump)
                self.alphas_.append(1.0)
                self.errors_.append(err)
                break
            alpha = self.learning_rate * (np.log((1.0 - err) / err) + np.log(K - 1.0))
            self.stumps_.append(stump)
            self.alphas_.append(float(alpha))
            self.errors_.append(err)
            w = w * np.exp(alpha * miss)
            w /= w.sum()

    def _stage_votes(self, X):
        votes = np.zeros((X.shape[0], self.n_classes_))
        rows = np.arange(X.shape[0])
        for stump, alpha in zip(self.stumps_, self.alphas_):
            votes[rows, np.argmax(stump.predict_value(X), axis=1)] += alpha
            yield votes

    def decision_function(self, X):
        X = self._check_X(X)
        votes = np.zeros((X.shape[0], self.n_classes_))
        for votes in self._stage_votes(X):
            pass
        return votes

    def staged_predict(self, X):
        """Prediction after each boosting round."""
        X = self._check_X(X)
        for votes in self._stage_votes(X):
            yield self.classes_[np.argmax(votes, axis=1)]

    _scores = decision_function
