"""FCN, CNN and hybrid (HPM) networks with brand / ethanol / methanol heads."""
import csv
import io
from collections import OrderedDict
from dataclasses import asdict, dataclass, field

import numpy as np

from .._random import rng_for
from .._validation import check_positive_int
from ..exceptions import (
    HeadNotPresent,
    InvalidArchitecture,
    InvalidArgument,
    NumericalFailure,
    ShapeError,
    TrainingDiverged,
)
from .layers import Conv1D, Dense, Flatten, MaxPool1D, ReLU, softmax

FCN, CNN, HPM = "FCN", "CNN", "HPM"
ARCHES = (FCN, CNN, HPM)
BRAND, ETHANOL, METHANOL = "brand", "ethanol", "methanol"
HEADS = (BRAND, ETHANOL, METHANOL)
REGRESSION_HEADS = (ETHANOL, METHANOL)


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture description.

    ``heads`` maps a head name to its output width: ``n_classes`` for
    ``"brand"`` and ``1`` for the concentration heads.
    """

    arch: str = HPM
    input_len: int = 1024
    use_pca_input: bool = False
    heads: dict = field(default_factory=lambda: {BRAND: 28})
    n_blocks: int = 5
    convs_per_block: int = 2
    base_channels: int = 8
    kernel_size: int = 3
    fcn_units: int = 10
    fcn_layers: int = 2
    abstraction_units: int = 40
    brand_units: int = 30
    regression_units: int = 10
    head_layers: int = 2

    def __post_init__(self):
        if self.arch not in ARCHES:
            raise InvalidArchitecture(f"unknown architecture {self.arch!r}")
        if not self.heads:
            raise InvalidArchitecture("a network needs at least one head")
        for name, width in self.heads.items():
            if name not in HEADS:
                raise InvalidArchitecture(f"unknown head {name!r}")
            if name == BRAND and int(width) < 2:
                raise InvalidArchitecture("the brand head needs at least 2 classes")
            if name != BRAND and int(width) != 1:
                raise InvalidArchitecture(f"head {name!r} has width 1")
        object.__setattr__(self, "heads", {h: int(self.heads[h]) for h in HEADS if h in self.heads})
        for name in ("input_len", "n_blocks", "convs_per_block", "base_channels",
                     "fcn_units", "fcn_layers", "abstraction_units", "brand_units",
                     "regression_units", "head_layers"):
            check_positive_int(getattr(self, name), name)
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise InvalidArchitecture("kernel_size must be odd so padding keeps the length")
        if self.uses_cnn and not self.use_pca_input and self.input_len < 2 ** self.n_blocks:
            raise InvalidArchitecture(
                f"input_len {self.input_len} is too short for {self.n_blocks} pooling stages"
            )

    @property
    def uses_cnn(self):
        return self.arch in (CNN, HPM)

    @property
    def uses_fcn(self):
        return self.arch in (FCN, HPM)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


class Network:
    """Initialised parameters plus the forward/backward passes for a spec.

    Parameters live in the layers; :meth:`parameters` exposes them as an
    ordered ``layer id -> {"W", "b"}`` mapping.
    """

    def __init__(self, spec, seed=0):
        self.spec = spec
        self.seed = seed
        rng = rng_for(seed, "network-init")
        self.branches = OrderedDict()
        width = 0
        if spec.uses_cnn:
            layers, out = self._build_cnn(rng)
            self.branches["cnn"] = layers
            width += out
        if spec.uses_fcn:
            layers = []
            n_in = spec.input_len
            for i in range(spec.fcn_layers):
                layers += [(f"fcn.dense{i}", Dense(n_in, spec.fcn_units, rng)), (f"fcn.relu{i}", ReLU())]
                n_in = spec.fcn_units
            self.branches["fcn"] = layers
            width += spec.fcn_units
        self.concat_width = width
        self.abstraction = []
        n_in = width
        for i in range(2):
            self.abstraction += [
                (f"abstract.dense{i}", Dense(n_in, spec.abstraction_units, rng)),
                (f"abstract.relu{i}", ReLU()),
            ]
            n_in = spec.abstraction_units
        self.heads = OrderedDict()
        for name, n_out in spec.heads.items():
            units = spec.brand_units if name == BRAND else spec.regression_units
            layers = []
            n_in = spec.abstraction_units
            for i in range(spec.head_layers):
                layers += [(f"head.{name}.dense{i}", Dense(n_in, units, rng)), (f"head.{name}.relu{i}", ReLU())]
                n_in = units
            layers.append((f"head.{name}.out", Dense(n_in, n_out, rng)))
            self.heads[name] = layers

    def _build_cnn(self, rng):
        spec = self.spec
        layers = []
        shape = (1, spec.input_len)
        pad = spec.kernel_size // 2
        for b in range(spec.n_blocks):
            channels = spec.base_channels * 2 ** b
            for j in range(spec.convs_per_block):
                conv = Conv1D(shape[0], channels, rng, spec.kernel_size, pad)
                new = conv.output_shape(shape)
                if new[1] != shape[1] + 2 * pad - spec.kernel_size + 1 or new[1] < 1:
                    raise InvalidArchitecture(f"conv length algebra broken at block {b}")
                shape = new
                layers += [(f"cnn.block{b}.conv{j}", conv), (f"cnn.block{b}.relu{j}", ReLU())]
            if not spec.use_pca_input:
                pool = MaxPool1D(2)
                shape = pool.output_shape(shape)
                if shape[1] < 1:
                    raise InvalidArchitecture(f"sequence vanished after pooling in block {b}")
                layers.append((f"cnn.block{b}.pool", pool))
        self.cnn_output_shape = shape
        layers.append(("cnn.flatten", Flatten()))
        return layers, shape[0] * shape[1]

    # -- parameter access -------------------------------------------------
    def _all_layers(self):
        for layers in self.branches.values():
            yield from layers
        yield from self.abstraction
        for layers in self.heads.values():
            yield from layers

    def parameters(self):
        return OrderedDict((lid, layer.params) for lid, layer in self._all_layers() if layer.params)

    def gradients(self):
        return OrderedDict((lid, layer.grads) for lid, layer in self._all_layers() if layer.params)

    def set_parameters(self, params):
        own = self.parameters()
        if set(own) != set(params):
            raise ShapeError("parameter layer ids do not match the architecture")
        for lid, tensors in params.items():
            for k, v in tensors.items():
                v = np.asarray(v, dtype=np.float64)
                if v.shape != own[lid][k].shape:
                    raise ShapeError(f"{lid}.{k}: shape {v.shape}, expected {own[lid][k].shape}")
                own[lid][k][...] = v

    # -- passes -----------------------------------------------------------
    @staticmethod
    def _run(layers, x):
        for lid, layer in layers:
            x = layer.forward(x)
            if not np.all(np.isfinite(x)):
                raise NumericalFailure(f"non-finite activations in {lid}", layer=lid)
        return x

    @staticmethod
    def _back(layers, g):
        for _, layer in reversed(layers):
            g = layer.backward(g)
        return g

    def forward(self, X):
        """Head outputs: class probabilities for ``"brand"``, a column vector otherwise."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.spec.input_len:
            raise ShapeError(f"network expects (n, {self.spec.input_len}) input, got {X.shape}")
        parts = []
        if "cnn" in self.branches:
            parts.append(self._run(self.branches["cnn"], X[:, None, :]))
        if "fcn" in self.branches:
            parts.append(self._run(self.branches["fcn"], X))
        h = self._run(self.abstraction, np.hstack(parts))
        out = OrderedDict()
        for name, layers in self.heads.items():
            z = self._run(layers, h)
            out[name] = softmax(z) if name == BRAND else z
        return out

    def loss(self, outputs, targets, weights=None):
        """Weighted sum of per-head losses; returns ``(total, per_head)``.

        Brand uses mean cross-entropy against integer labels, concentration
        heads use mean squared error.
        """
        weights = _resolve_weights(self.spec, weights)
        per_head = OrderedDict()
        for name, pred in outputs.items():
            if name not in targets:
                continue
            t = np.asarray(targets[name])
            if name == BRAND:
                p = pred[np.arange(pred.shape[0]), t.astype(np.int64)]
                per_head[name] = float(-np.mean(np.log(np.clip(p, 1e-300, None))))
            else:
                per_head[name] = float(np.mean((pred[:, 0] - t) ** 2))
        total = float(sum(weights[h] * v for h, v in per_head.items()))
        if not np.isfinite(total):
            bad = next(h for h, v in per_head.items() if not np.isfinite(v))
            raise NumericalFailure(f"non-finite loss in head {bad}", layer=f"head.{bad}.out")
        return total, per_head

    def backward(self, outputs, targets, weights=None):
        """Fill every layer's ``grads`` for the loss of :meth:`loss` on the last forward batch."""
        weights = _resolve_weights(self.spec, weights)
        n = next(iter(outputs.values())).shape[0]
        dh = np.zeros((n, self.spec.abstraction_units))
        for name, layers in self.heads.items():
            pred = outputs[name]
            lam = weights[name] if name in targets else 0.0
            if name == BRAND:
                g = pred.copy()
                if lam:
                    g[np.arange(n), np.asarray(targets[name]).astype(np.int64)] -= 1.0
                g *= lam / n
            else:
                g = np.zeros_like(pred)
                if lam:
                    g[:, 0] = 2.0 * lam * (pred[:, 0] - np.asarray(targets[name])) / n
            dh += self._back(layers, g)
        dcat = self._back(self.abstraction, dh)
        start = 0
        if "cnn" in self.branches:
            width = self.concat_width - (self.spec.fcn_units if "fcn" in self.branches else 0)
            self._back(self.branches["cnn"], dcat[:, start:start + width])
            start += width
        if "fcn" in self.branches:
            self._back(self.branches["fcn"], dcat[:, start:])
        return self.gradients()

    def predict_brand(self, X):
        if BRAND not in self.heads:
            raise HeadNotPresent("network has no brand head")
        return np.argmax(self.forward(X)[BRAND], axis=1)

    def predict_concentration(self, X, head):
        if head not in self.heads or head == BRAND:
            raise HeadNotPresent(f"network has no {head!r} concentration head")
        return self.forward(X)[head][:, 0]


def _resolve_weights(spec, weights):
    out = {h: 1.0 for h in spec.heads}
    if weights:
        for h, w in weights.items():
            if h not in spec.heads:
                raise HeadNotPresent(f"loss weight given for absent head {h!r}")
            if w < 0:
                raise InvalidArgument("loss weights must be >= 0")
            out[h] = float(w)
    return out


def build_network(spec, seed=0):
    return Network(spec, seed)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    loss_weights: dict = field(default_factory=dict)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        check_positive_int(self.epochs, "epochs")
        check_positive_int(self.batch_size, "batch_size")
        if not self.learning_rate > 0:
            raise InvalidArgument("learning_rate must be > 0")


class TrainTrace:
    """Per-epoch training loss, validation loss and validation metrics."""

    def __init__(self, heads):
        self.heads = list(heads)
        self.rows = []

    @property
    def columns(self):
        cols = ["epoch", "train_loss", "val_loss"]
        for h in self.heads:
            cols.append(f"val_{h}_accuracy" if h == BRAND else f"val_{h}_rmse")
        return cols

    def append(self, row):
        self.rows.append(row)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([row[0]] + ["" if v is None else format(v, ".10g") for v in row[1:]])
        return buf.getvalue()


class Adam:
    def __init__(self, params, lr, beta1, beta2, eps):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {(l, k): np.zeros_like(v) for l, p in params.items() for k, v in p.items()}
        self.v = {key: np.zeros_like(m) for key, m in self.m.items()}

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for lid, tensors in params.items():
            for k, value in tensors.items():
                g = grads[lid][k]
                m = self.m[lid, k]
                v = self.v[lid, k]
                m *= self.beta1
                m += (1.0 - self.beta1) * g
                v *= self.beta2
                v += (1.0 - self.beta2) * g * g
                value -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def _batched_forward(net, X, batch=512):
    outs = [net.forward(X[i:i + batch]) for i in range(0, X.shape[0], batch)]
    return OrderedDict((h, np.vstack([o[h] for o in outs])) for h in outs[0])


def _metrics(net, X, targets):
    out = _batched_forward(net, X)
    total, _ = net.loss(out, targets)
    metrics = []
    for h in net.spec.heads:
        if h not in targets:
            metrics.append(None)
        elif h == BRAND:
            metrics.append(100.0 * float(np.mean(np.argmax(out[h], axis=1) == targets[h])))
        else:
            metrics.append(float(np.sqrt(np.mean((out[h][:, 0] - targets[h]) ** 2))))
    return total, metrics


def train(net, config, X, targets, X_val=None, val_targets=None, callback=None):
    """Mini-batch Adam on the joint loss; returns the :class:`TrainTrace`.

    The shuffle order of epoch ``e`` comes from ``(config.seed, "shuffle", e)``,
    so a run is reproducible and independent of earlier epochs' timing.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    for h, t in targets.items():
        if h not in net.spec.heads:
            raise HeadNotPresent(f"targets given for absent head {h!r}")
        if len(t) != n:
            raise ShapeError(f"{h} targets have {len(t)} rows, X has {n}")
    targets = {h: np.asarray(t) for h, t in targets.items()}
    if X_val is not None:
        val_targets = {h: np.asarray(t) for h, t in val_targets.items()}
    weights = config.loss_weights
    opt = Adam(net.parameters(), config.learning_rate, config.beta1, config.beta2, config.eps)
    trace = TrainTrace(net.spec.heads)
    params = net.parameters()
    for epoch in range(1, config.epochs + 1):
        order = rng_for(config.seed, "shuffle", epoch).permutation(n)
        running = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            batch_targets = {h: t[idx] for h, t in targets.items()}
            try:
                out = net.forward(X[idx])
                loss, _ = net.loss(out, batch_targets, weights)
            except NumericalFailure as exc:
                raise TrainingDiverged(epoch) from exc
            running += loss * idx.size
            grads = net.backward(out, batch_targets, weights)
            opt.step(params, grads)
        val_loss, val_metrics = None, [None] * len(net.spec.heads)
        if X_val is not None:
            val_loss, val_metrics = _metrics(net, X_val, val_targets)
        trace.append([epoch, running / n, val_loss] + val_metrics)
        if callback is not None:
            callback(epoch, net)
    return trace
