"""Estimator wrappers: optional PCA front end, input standardisation, training."""
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import as_labels, as_matrix, as_vector
from ..exceptions import HeadNotPresent, InvalidArgument
from ..preprocess import PCA
from .network import BRAND, HEADS, REGRESSION_HEADS, Network, NetworkSpec, TrainConfig, train


class SpectralNet(BaseEstimator):
    """Multi-head spectral network.

    ``fit(X, y)`` takes ``y`` as a dict mapping head names (``"brand"``,
    ``"ethanol"``, ``"methanol"``) to targets; one head is created per key.
    Inputs (raw spectra or PCA scores) are standardised column-wise with
    training statistics, and concentration targets are standardised too;
    predictions are mapped back to % v/v.
    """

    def __init__(self, arch="HPM", use_pca=True, n_pca=6, epochs=200, batch_size=32,
                 learning_rate=1e-3, loss_weights=None, seed=0, n_blocks=5):
        self.arch = arch
        self.use_pca = use_pca
        self.n_pca = n_pca
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.loss_weights = loss_weights
        self.seed = seed
        self.n_blocks = n_blocks

    # -- input side ---------------------------------------------------------
    def _features(self, X):
        Z = self.pca_.transform(X) if self.pca_ is not None else X
        return (Z - self.input_mean_) / self.input_scale_

    def _encode_targets(self, y, n, fitting):
        if not isinstance(y, dict) or not y:
            raise InvalidArgument("targets must be a non-empty dict keyed by head name")
        out = {}
        for head, values in y.items():
            if head not in HEADS:
                raise HeadNotPresent(f"unknown head {head!r}")
            if head == BRAND:
                codes, classes = as_labels(values, n, name=head)
                if fitting:
                    self.classes_ = classes
                else:
                    lookup = {c: i for i, c in enumerate(self.classes_.tolist())}
                    codes = np.array([lookup.get(c, -1) for c in np.asarray(values).tolist()])
                    if np.any(codes < 0):
                        raise InvalidArgument("validation labels contain unseen classes")
                out[head] = codes
            else:
                v = as_vector(values, n, name=head)
                if fitting:
                    std = float(v.std())
                    self.target_stats_[head] = (float(v.mean()), std if std > 0 else 1.0)
                mu, sd = self.target_stats_[head]
                out[head] = (v - mu) / sd
        return out

    def fit(self, X, y, X_val=None, y_val=None):
        X = as_matrix(X)
        self.n_features_in_ = X.shape[1]
        self.target_stats_ = {}
        targets = self._encode_targets(y, X.shape[0], fitting=True)
        self.pca_ = PCA(self.n_pca).fit(X) if self.use_pca else None
        Z = self.pca_.transform(X) if self.pca_ is not None else X
        self.input_mean_ = Z.mean(axis=0)
        scale = Z.std(axis=0)
        self.input_scale_ = np.where(scale > 0, scale, 1.0)
        Z = (Z - self.input_mean_) / self.input_scale_
        heads = {h: (len(self.classes_) if h == BRAND else 1) for h in HEADS if h in targets}
        self.spec_ = NetworkSpec(self.arch, Z.shape[1], bool(self.use_pca), heads, n_blocks=self.n_blocks)
        self.network_ = Network(self.spec_, self.seed)
        config = TrainConfig(self.epochs, self.batch_size, self.learning_rate, self.seed,
                             dict(self.loss_weights or {}))
        Zv = val_targets = None
        if X_val is not None:
            Xv = as_matrix(X_val, self.n_features_in_, name="X_val")
            Zv = self._features(Xv)
            val_targets = self._encode_targets(y_val, Xv.shape[0], fitting=False)
        self.trace_ = train(self.network_, config, Z, targets, Zv, val_targets)
        self._unscale_trace()
        return self

    def _unscale_trace(self):
        heads = list(self.spec_.heads)
        for row in self.trace_.rows:
            for j, h in enumerate(heads):
                if h in REGRESSION_HEADS and row[3 + j] is not None:
                    row[3 + j] *= self.target_stats_[h][1]

    # -- outputs ------------------------------------------------------------
    def predict_heads(self, X):
        check_is_fitted(self, "network_")
        X = as_matrix(X, self.n_features_in_)
        Z = self._features(X)
        out = {}
        raw = {}
        for i in range(0, Z.shape[0], 512):
            for h, v in self.network_.forward(Z[i:i + 512]).items():
                raw.setdefault(h, []).append(v)
        for h, parts in raw.items():
            v = np.vstack(parts)
            if h == BRAND:
                out[h] = v
            else:
                mu, sd = self.target_stats_[h]
                out[h] = v[:, 0] * sd + mu
        return out

    def predict_brand(self, X):
        if BRAND not in self.spec_.heads:
            raise HeadNotPresent("model has no brand head")
        return self.classes_[np.argmax(self.predict_heads(X)[BRAND], axis=1)]

    def predict_concentration(self, X, head):
        check_is_fitted(self, "network_")
        if head not in self.spec_.heads or head == BRAND:
            raise HeadNotPresent(f"model has no {head!r} head")
        return self.predict_heads(X)[head]


class SpectralNetClassifier(ClassifierMixin, SpectralNet):
    """Brand-only network with the usual classifier interface."""

    def fit(self, X, y, X_val=None, y_val=None):
        y_val = None if y_val is None else {BRAND: y_val}
        return super().fit(X, {BRAND: y}, X_val, y_val)

    def predict_proba(self, X):
        return self.predict_heads(X)[BRAND]

    def predict(self, X):
        return self.predict_brand(X)


class SpectralNetRegressor(RegressorMixin, SpectralNet):
    """Single concentration head (``target`` is ``"ethanol"`` or ``"methanol"``)."""

    def __init__(self, arch="HPM", use_pca=True, n_pca=6, epochs=200, batch_size=32,
                 learning_rate=1e-3, loss_weights=None, seed=0, n_blocks=5, target="ethanol"):
        super().__init__(arch, use_pca, n_pca, epochs, batch_size, learning_rate,
                         loss_weights, seed, n_blocks)
        self.target = target

    def fit(self, X, y, X_val=None, y_val=None):
        if self.target not in REGRESSION_HEADS:
            raise InvalidArgument(f"target must be one of {REGRESSION_HEADS}")
        y_val = None if y_val is None else {self.target: y_val}
        return super().fit(X, {self.target: y}, X_val, y_val)

    def predict(self, X):
        return self.predict_concentration(X, self.target)
