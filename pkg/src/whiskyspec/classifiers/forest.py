"""CART trees with Gini impurity and a bootstrap random forest built on them."""
import numpy as np

from .._random import rng_for
from .._validation import check_positive_int
from ..exceptions import InvalidArgument
from ._base import BaseClassifier

LEAF = -1


class Tree:
    """Array-backed binary tree; samples with ``x[feature] <= threshold`` go left."""

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def n_nodes(self):
        return len(self.feature)

    def apply(self, X):
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != LEAF
        while np.any(active):
            rows = np.flatnonzero(active)
            n = node[rows]
            go_left = X[rows, self.feature[n]] <= self.threshold[n]
            node[rows] = np.where(go_left, self.left[n], self.right[n])
            active = self.feature[node] != LEAF
        return node

    def predict_value(self, X):
        return self.value[self.apply(X)]

    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def to_nested(self, i=0):
        if self.feature[i] == LEAF:
            return {"value": self.value[i].tolist()}
        return {
            "feature": int(self.feature[i]),
            "threshold": float(self.threshold[i]),
            "left": self.to_nested(int(self.left[i])),
            "right": self.to_nested(int(self.right[i])),
        }

    @classmethod
    def from_nested(cls, record):
        feature, threshold, left, right, value = [], [], [], [], []

        def visit(rec):
            i = len(feature)
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            value.append(None)
            if "value" in rec:
                value[i] = rec["value"]
                return i
            feature[i] = int(rec["feature"])
            threshold[i] = float(rec["threshold"])
            left[i] = visit(rec["left"])
            right[i] = visit(rec["right"])
            return i

        visit(record)
        width = max(len(v) for v in value if v is not None)
        value = [v if v is not None else [0.0] * width for v in value]
        return cls(feature, threshold, left, right, value)


def _best_split(Xn, Yn, features, chunk=128):
    """Lowest weighted Gini split of one node over the candidate ``features``.

    ``Xn`` holds the node's rows, ``Yn`` their (weighted) one-hot labels.
    Returns ``(impurity, feature, threshold)`` or ``None`` if every candidate
    is constant on the node. Ties go to the earlier candidate, then the
    lower threshold.
    """
    best = None
    for start in range(0, len(features), chunk):
        found = _best_split_block(Xn, Yn, features[start:start + chunk])
        if found is not None and (best is None or found[0] < best[0]):
            best = found
    return best


def _best_split_block(Xn, Yn, features):
    vals = Xn[:, features]
    order = np.argsort(vals, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(vals, order, axis=0)
    valid = sorted_vals[:-1] < sorted_vals[1:]
    if not np.any(valid):
        return None
    left_counts = np.cumsum(Yn[order], axis=0)[:-1]  # (n-1, m, C)
    total = Yn.sum(axis=0)
    right_counts = total[None, None, :] - left_counts
    w_left = left_counts.sum(axis=2)
    w_right = right_counts.sum(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        impurity = (w_left - np.sum(left_counts ** 2, axis=2) / w_left
                    + w_right - np.sum(right_counts ** 2, axis=2) / w_right) / total.sum()
    impurity = np.where(valid & (w_left > 0) & (w_right > 0), impurity, np.inf)
    per_feature = np.min(impurity, axis=0)
    j = int(np.argmin(per_feature))
    if not np.isfinite(per_feature[j]):
        return None
    i = int(np.argmin(impurity[:, j]))
    lo, hi = sorted_vals[i, j], sorted_vals[i + 1, j]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:
        thr = lo
    return float(impurity[i, j]), int(features[j]), float(thr)


def grow_tree(X, y, n_classes, max_features, rng, max_depth=None, sample_weight=None):
    """Grow a Gini tree to purity (or ``max_depth``).

    At each node ``max_features`` features are drawn without replacement; if
    all of them are constant on the node the remaining features are tried in
    a random order before the node is declared a leaf.
    """
    n, d = X.shape
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0 if sample_weight is None else sample_weight
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(rows):
        counts = onehot[rows].sum(axis=0)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(counts / counts.sum())
        return len(feature) - 1

    stack = [(new_node(np.arange(n)), np.arange(n), 0)]
    while stack:
        node, rows, depth = stack.pop()
        if np.count_nonzero(value[node]) <= 1 or rows.size < 2:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        perm = rng.permutation(d)
        Xn, Yn = X[rows], onehot[rows]
        split = _best_split(Xn, Yn, perm[:max_features])
        if split is None and max_features < d:
            split = _best_split(Xn, Yn, perm[max_features:])
        if split is None:
            continue
        _, f, thr = split
        mask = Xn[:, f] <= thr
        feature[node], threshold[node] = f, thr
        l_rows, r_rows = rows[mask], rows[~mask]
        left[node] = new_node(l_rows)
        right[node] = new_node(r_rows)
        stack.append((right[node], r_rows, depth + 1))
        stack.append((left[node], l_rows, depth + 1))
    return Tree(feature, threshold, left, right, value)


def resolve_max_features(max_features, n_features):
    if max_features == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    if max_features is None:
        return n_features
    m = check_positive_int(max_features, "max_features")
    return min(m, n_features)


class RandomForestClassifier(BaseClassifier):
    """Bootstrap forest of unpruned Gini trees; prediction is a majority vote.

    ``predict_proba`` returns the fraction of trees voting for each class.
    Tree ``t`` draws from its own stream derived from ``(seed, t)``, so the
    forest does not depend on the order in which trees are grown.
    """

    def __init__(self, n_estimators=100, max_depth=None, max_features="sqrt",
                 bootstrap=True, seed=0):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed

    def _fit(self, X, y):
        n_trees = check_positive_int(self.n_estimators, "n_estimators")
        if self.max_depth is not None:
            check_positive_int(self.max_depth, "max_depth")
        if self.max_features not in ("sqrt", None) and not isinstance(self.max_features, int):
            raise InvalidArgument(f"max_features must be 'sqrt', None or an int, got {self.max_features!r}")
        m = resolve_max_features(self.max_features, X.shape[1])
        n = X.shape[0]
        self.trees_ = []
        for t in range(n_trees):
            rng = rng_for(self.seed, "random-forest", t)
            rows = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            self.trees_.append(grow_tree(X[rows], y[rows], self.n_classes_, m, rng, self.max_depth))

    def predict_proba(self, X):
        X = self._check_X(X)
        votes = np.zeros((X.shape[0], self.n_classes_))
        rows = np.arange(X.shape[0])
        for tree in self.trees_:
            votes[rows, np.argmax(tree.predict_value(X), axis=1)] += 1.0
        return votes / len(self.trees_)

    def _scores(self, X):
        return self.predict_proba(X)
