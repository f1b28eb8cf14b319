"""Versioned JSON model files.

A file is ``{"format", "schema_version", "task", "grid", "estimator", "meta"}``.
Estimators are stored as their class name, constructor parameters and
fitted attributes (the public names ending in ``_``). Arrays become
``{"ndarray": {"dtype", "shape", "values"}}`` with values flattened in C
order; tree ensembles store each tree as nested node records; networks store
``layer id -> {tensor: array}``. Floats are written with ``repr`` precision,
so a reloaded model predicts exactly what the saved one did.
"""
import json
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.pipeline import Pipeline

from .classifiers import ALGORITHMS
from .classifiers.forest import Tree
from .core import SpectralGrid
from .exceptions import InvalidArgument, ParseError, SchemaVersionError
from .neural import SpectralNet, SpectralNetClassifier, SpectralNetRegressor
from .neural.network import Network, NetworkSpec, TrainTrace
from .preprocess import PCA, PolyBaseline, Scaler
from .regression import PCRegressor, PLSRegressor, RidgeRegressor, SpectralPreprocessor

MODEL_FORMAT = "whiskyspec-model"
SCHEMA_VERSION = 1

# only these classes can be rebuilt from a file
REGISTRY = {cls.__name__: cls for cls in (
    *ALGORITHMS.values(), PCA, PolyBaseline, Scaler, SpectralPreprocessor,
    PLSRegressor, PCRegressor, RidgeRegressor,
    SpectralNet, SpectralNetClassifier, SpectralNetRegressor,
)}


def _fitted_attributes(est):
    return sorted(k for k in vars(est) if k.endswith("_") and not k.startswith("_"))


def encode(value):
    if isinstance(value, Pipeline):
        return {"pipeline": [[name, encode(step)] for name, step in value.steps]}
    if isinstance(value, BaseEstimator):
        name = type(value).__name__
        if name not in REGISTRY:
            raise InvalidArgument(f"cannot serialise {name}")
        return {"estimator": {
            "class": name,
            "params": {k: encode(v) for k, v in value.get_params(deep=False).items()},
            "state": {k: encode(getattr(value, k)) for k in _fitted_attributes(value)},
        }}
    if isinstance(value, np.ndarray):
        return {"ndarray": {"dtype": value.dtype.str, "shape": list(value.shape),
                            "values": value.ravel().tolist()}}
    if isinstance(value, Tree):
        return {"tree": value.to_nested()}
    if isinstance(value, Network):
        return {"network": {
            "spec": value.spec.to_dict(),
            "seed": value.seed,
            "layers": {lid: {k: encode(v) for k, v in tensors.items()}
                       for lid, tensors in value.parameters().items()},
        }}
    if isinstance(value, NetworkSpec):
        return {"network_spec": value.to_dict()}
    if isinstance(value, TrainTrace):
        return {"trace": {"heads": value.heads, "rows": value.rows}}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, dict):
        return {"mapping": [[k, encode(v)] for k, v in value.items()]}
    if isinstance(value, np.generic):
        return value.item()
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    raise InvalidArgument(f"cannot serialise value of type {type(value).__name__}")


def decode(value):
    if isinstance(value, list):
        return [decode(v) for v in value]
    if not isinstance(value, dict):
        return value
    if len(value) != 1:
        raise ParseError(f"malformed model record with keys {sorted(value)}")
    (tag, body), = value.items()
    if tag == "ndarray":
        arr = np.array(body["values"], dtype=np.dtype(body["dtype"]))
        return arr.reshape(body["shape"])
    if tag == "tree":
        return Tree.from_nested(body)
    if tag == "mapping":
        return {k: decode(v) for k, v in body}
    if tag == "pipeline":
        return Pipeline([(name, decode(step)) for name, step in body])
    if tag == "network_spec":
        return NetworkSpec.from_dict(body)
    if tag == "trace":
        trace = TrainTrace(body["heads"])
        trace.rows = [list(r) for r in body["rows"]]
        return trace
    if tag == "network":
        net = Network(NetworkSpec.from_dict(body["spec"]), body["seed"])
        net.set_parameters({lid: {k: decode(v) for k, v in tensors.items()}
                            for lid, tensors in body["layers"].items()})
        return net
    if tag == "estimator":
        cls = REGISTRY.get(body["class"])
        if cls is None:
            raise ParseError(f"unknown estimator class {body['class']!r}")
        est = cls(**{k: decode(v) for k, v in body["params"].items()})
        for k, v in body["state"].items():
            setattr(est, k, decode(v))
        return est
    raise ParseError(f"unknown model record tag {tag!r}")


def model_to_dict(estimator, task, grid=None, meta=None):
    """``task`` names what the model predicts: ``"brand"``, ``"ethanol"`` or ``"methanol"``."""
    return {
        "format": MODEL_FORMAT,
        "schema_version": SCHEMA_VERSION,
        "task": task,
        "grid": grid.to_dict() if grid is not None else None,
        "estimator": encode(estimator),
        "meta": dict(meta or {}),
    }


def model_from_dict(d):
    """Returns ``(estimator, task, grid, meta)``."""
    if not isinstance(d, dict) or d.get("format") != MODEL_FORMAT:
        raise ParseError("not a whiskyspec model file")
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"model schema_version {version!r}; this build reads {SCHEMA_VERSION}")
    grid = SpectralGrid.from_dict(d["grid"]) if d.get("grid") else None
    return decode(d["estimator"]), d["task"], grid, d.get("meta", {})


def save_model(path, estimator, task, grid=None, meta=None):
    text = json.dumps(model_to_dict(estimator, task, grid, meta), sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path):
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(d)
