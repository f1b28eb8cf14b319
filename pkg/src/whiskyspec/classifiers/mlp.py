import numpy as np

from .._random import rng_for
from .._validation import check_positive_int
from ..exceptions import InvalidArgument, TrainingDiverged
from ._base import BaseClassifier, softmax_rows


class MLPClassifier(BaseClassifier):
    """One ReLU hidden layer, softmax output, cross-entropy with an L2 penalty.

    The loss is ``mean cross-entropy + alpha / (2 n) * sum(W ** 2)`` over both
    weight matrices (biases are not penalised). Training is full-batch with
    Adam steps and stops after ``max_iter`` iterations or once the loss
    changes by less than ``tol``.
    """

    def __init__(self, hidden_units=100, alpha=1.0, max_iter=1000, tol=1e-6,
                 learning_rate=1e-3, seed=0):
        self.hidden_units = hidden_units
        self.alpha = alpha
        self.max_iter = max_iter
        self.tol = tol
        self.learning_rate = learning_rate
        self.seed = seed

    def _init_params(self, n_in, n_out):
        rng = rng_for(self.seed, "mlp")
        h = check_positive_int(self.hidden_units, "hidden_units")
        params = []
        for fan_in, fan_out in ((n_in, h), (h, n_out)):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            params.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            params.append(rng.uniform(-bound, bound, size=fan_out))
        return params

    def _forward(self, X, params):
        W1, b1, W2, b2 = params
        pre = X @ W1 + b1
        hidden = np.maximum(pre, 0.0)
        return pre, hidden, softmax_rows(hidden @ W2 + b2)

    def _loss_grad(self, X, Y, params):
        W1, b1, W2, b2 = params
        n = X.shape[0]
        pre, hidden, proba = self._forward(X, params)
        ce = -np.sum(Y * np.log(np.clip(proba, 1e-300, None))) / n
        loss = ce + self.alpha / (2.0 * n) * (np.sum(W1 ** 2) + np.sum(W2 ** 2))
        d_out = (proba - Y) / n
        gW2 = hidden.T @ d_out + self.alpha / n * W2
        gb2 = d_out.sum(axis=0)
        d_hidden = (d_out @ W2.T) * (pre > 0)
        gW1 = X.T @ d_hidden + self.alpha / n * W1
        gb1 = d_hidden.sum(axis=0)
        return loss, [gW1, gb1, gW2, gb2]

    def _fit(self, X, y):
        iters = check_positive_int(self.max_iter, "max_iter")
        if self.alpha < 0:
            raise InvalidArgument("alpha must be >= 0")
        Y = np.zeros((X.shape[0], self.n_classes_))
        Y[np.arange(X.shape[0]), y] = 1.0
        params = self._init_params(X.shape[1], self.n_classes_)
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        self.loss_curve_ = []
        prev = np.inf
        for t in range(1, iters + 1):
            loss, grads = self._loss_grad(X, Y, params)
            if not np.isfinite(loss):
                raise TrainingDiverged(t)
            self.loss_curve_.append(float(loss))
            if abs(prev - loss) < self.tol:
                break
            prev = loss
            for k, g in enumerate(grads):
                m[k] = beta1 * m[k] + (1 - beta1) * g
                v[k] = beta2 * v[k] + (1 - beta2) * g * g
                m_hat = m[k] / (1 - beta1 ** t)
                v_hat = v[k] / (1 - beta2 ** t)
                params[k] = params[k] - self.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        self.coefs_ = [params[0], params[2]]
        self.intercepts_ = [params[1], params[3]]
        self.n_iter_ = len(self.loss_curve_)

    def predict_proba(self, X):
        X = self._check_X(X)
        params = [self.coefs_[0], self.intercepts_[0], self.coefs_[1], self.intercepts_[1]]
        return self._forward(X, params)[2]

    def _scores(self, X):
        return self.predict_proba(X)
