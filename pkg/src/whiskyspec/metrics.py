import numpy as np

from .exceptions import DegenerateTarget, EmptyDataset, ShapeError


def _pair(y_true, y_pred):
    a = np.asarray(y_true)
    b = np.asarray(y_pred)
    if a.ndim != 1 or b.ndim != 1:
        raise ShapeError("expected 1-D label/target vectors")
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] == 0:
        raise EmptyDataset("no samples to score")
    return a, b


def accuracy(y_true, y_pred):
    """Percentage of exact matches."""
    a, b = _pair(y_true, y_pred)
    return 100.0 * np.count_nonzero(a == b) / a.shape[0]


def rmse(y_true, y_pred):
    a, b = _pair(y_true, y_pred)
    d = a.astype(np.float64) - b.astype(np.float64)
    return float(np.sqrt(np.mean(d * d)))


def r2(y_true, y_pred):
    a, b = _pair(y_true, y_pred)
    a = a.astype(np.float64)
    ss_tot = np.sum((a - a.mean()) ** 2)
    if ss_tot == 0:
        raise DegenerateTarget("R^2 is undefined for a constant target")
    return float(1.0 - np.sum((a - b) ** 2) / ss_tot)


def confusion(y_true, y_pred, n_classes=None):
    """Counts matrix with true classes on rows and predicted classes on columns.

    Labels must be non-negative integers.
    """
    a, b = _pair(y_true, y_pred)
    a = a.astype(np.int64)
    b = b.astype(np.int64)
    if n_classes is None:
        n_classes = int(max(a.max(), b.max())) + 1
    out = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(out, (a, b), 1)
    return out
