"""Differentiable layers with hand-written backward passes (float64 throughout).

Every layer exposes ``params`` and ``grads`` dicts with matching keys;
``forward`` caches what ``backward`` needs, so a layer serves one batch at a
time.
"""
import numpy as np


def he_uniform(rng, shape, fan_in):
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Layer:
    params = {}
    grads = {}

    def output_shape(self, shape):
        """Shape of one sample's output given one sample's input shape."""
        return shape

    def zero_grad(self):
        for k in self.grads:
            self.grads[k] = np.zeros_like(self.params[k])


class Dense(Layer):
    def __init__(self, n_in, n_out, rng):
        self.params = {"W": he_uniform(rng, (n_in, n_out), n_in), "b": np.zeros(n_out)}
        self.grads = {"W": np.zeros((n_in, n_out)), "b": np.zeros(n_out)}

    def output_shape(self, shape):
        return (self.params["W"].shape[1],)

    def forward(self, x):
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dout):
        self.grads["W"] = self._x.T @ dout
        self.grads["b"] = dout.sum(axis=0)
        return dout @ self.params["W"].T


class ReLU(Layer):
    def forward(self, x):
        self._mask = x > 0
        return x * self._mask

    def backward(self, dout):
        return dout * self._mask


class Conv1D(Layer):
    """Stride-1 convolution over ``(batch, channels, length)`` with zero padding.

    Output length is ``L + 2 * padding - kernel_size + 1``; ``padding = 1`` with
    ``kernel_size = 3`` keeps the length unchanged.
    """

    def __init__(self, c_in, c_out, rng, kernel_size=3, padding=1):
        self.kernel_size = kernel_size
        self.padding = padding
        fan_in = c_in * kernel_size
        self.params = {
            "W": he_uniform(rng, (c_out, c_in, kernel_size), fan_in),
            "b": np.zeros(c_out),
        }
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def output_shape(self, shape):
        c, length = shape
        out_len = length + 2 * self.padding - self.kernel_size + 1
        return (self.params["W"].shape[0], out_len)

    def forward(self, x):
        n, c, length = x.shape
        k, p = self.kernel_size, self.padding
        out_len = length + 2 * p - k + 1
        xp = np.pad(x, ((0, 0), (0, 0), (p, p))) if p else x
        # cols[b, t, ch, j] = xp[b, ch, t + j]
        cols = np.stack([xp[:, :, j:j + out_len] for j in range(k)], axis=3)
        cols = cols.transpose(0, 2, 1, 3).reshape(n * out_len, c * k)
        W = self.params["W"]
        self._cols, self._shape = cols, (n, c, length, out_len)
        out = cols @ W.reshape(W.shape[0], -1).T + self.params["b"]
        return out.reshape(n, out_len, W.shape[0]).transpose(0, 2, 1)

    def backward(self, dout):
        n, c, length, out_len = self._shape
        k, p = self.kernel_size, self.padding
        W = self.params["W"]
        c_out = W.shape[0]
        G = dout.transpose(0, 2, 1).reshape(n * out_len, c_out)
        self.grads["W"] = (G.T @ self._cols).reshape(W.shape)
        self.grads["b"] = G.sum(axis=0)
        dcols = (G @ W.reshape(c_out, -1)).reshape(n, out_len, c, k)
        dxp = np.zeros((n, c, length + 2 * p))
        for j in range(k):
            dxp[:, :, j:j + out_len] += dcols[:, :, :, j].transpose(0, 2, 1)
        return dxp[:, :, p:p + length] if p else dxp


class MaxPool1D(Layer):
    """Non-overlapping max pooling; a trailing odd sample is dropped (floor)."""

    def __init__(self, width=2):
        self.width = width

    def output_shape(self, shape):
        c, length = shape
        return (c, length // self.width)

    def forward(self, x):
        n, c, length = x.shape
        w = self.width
        out_len = length // w
        windows = x[:, :, :out_len * w].reshape(n, c, out_len, w)
        self._arg = np.argmax(windows, axis=3)
        self._shape = x.shape
        return np.take_along_axis(windows, self._arg[..., None], axis=3)[..., 0]

    def backward(self, dout):
        n, c, length = self._shape
        w = self.width
        out_len = length // w
        dwin = np.zeros((n, c, out_len, w))
        np.put_along_axis(dwin, self._arg[..., None], dout[..., None], axis=3)
        dx = np.zeros(self._shape)
        dx[:, :, :out_len * w] = dwin.reshape(n, c, out_len * w)
        return dx


class Flatten(Layer):
    def output_shape(self, shape):
        return (int(np.prod(shape)),)

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape)


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)
