"""Input checks shared by the estimators."""
import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import EmptyDataset, InvalidArgument, ShapeError


def as_matrix(X, n_features=None, name="X"):
    """Return ``X`` as a finite 2-D float64 array, checking its width if asked."""
    if X is None:
        raise InvalidArgument(f"{name} is None")
    arr = np.asarray(X)
    if arr.size == 0:
        raise EmptyDataset(f"{name} is empty")
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    try:
        arr = check_array(arr, dtype=np.float64, ensure_all_finite=True)
    except ValueError as exc:
        raise InvalidArgument(f"{name}: {exc}") from exc
    if n_features is not None and arr.shape[1] != n_features:
        raise ShapeError(f"{name} has {arr.shape[1]} features, expected {n_features}")
    return arr


def as_vector(y, n=None, name="y", dtype=np.float64):
    arr = np.asarray(y)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise EmptyDataset(f"{name} is empty")
    if n is not None and arr.shape[0] != n:
        raise ShapeError(f"{name} has {arr.shape[0]} entries, expected {n}")
    arr = arr.astype(dtype)
    if np.issubdtype(arr.dtype, np.floating) and not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} has non-finite values")
    return arr


def as_labels(y, n=None, name="y"):
    """Integer class labels; returns ``(encoded, classes)``."""
    arr = np.asarray(y)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ShapeError(f"{name} has {arr.shape[0]} entries, expected {n}")
    if arr.size == 0:
        raise EmptyDataset(f"{name} is empty")
    classes, encoded = np.unique(arr, return_inverse=True)
    return encoded.astype(np.int64), classes


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise InvalidArgument(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
