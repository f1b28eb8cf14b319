"""Classical brand classifiers and a small factory keyed by algorithm name."""
from dataclasses import dataclass, field

from sklearn.pipeline import Pipeline

from ..exceptions import InvalidArgument
from ..preprocess import PCA
from .boosting import AdaBoostClassifier
from .discriminant import LDAClassifier, QDAClassifier
from .forest import RandomForestClassifier
from .mlp import MLPClassifier
from .neighbors import KNNClassifier
from .svm import LinearSVMClassifier, RbfSVMClassifier

ALGORITHMS = {
    "KNN": KNNClassifier,
    "LDA": LDAClassifier,
    "QDA": QDAClassifier,
    "RF": RandomForestClassifier,
    "AdaBoost": AdaBoostClassifier,
    "LinearSVM": LinearSVMClassifier,
    "RbfSVM": RbfSVMClassifier,
    "MLP": MLPClassifier,
}

# command-line spellings
CLI_NAMES = {
    "knn": "KNN",
    "lda": "LDA",
    "qda": "QDA",
    "rf": "RF",
    "adaboost": "AdaBoost",
    "svm-linear": "LinearSVM",
    "svm-rbf": "RbfSVM",
    "mlp": "MLP",
}


@dataclass(frozen=True)
class ClassifierSpec:
    """Algorithm name, hyper-parameter overrides and seed; checked on creation."""

    algorithm: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidArgument(
                f"unknown algorithm {self.algorithm!r}; choose from {sorted(ALGORITHMS)}"
            )
        allowed = set(ALGORITHMS[self.algorithm]().get_params()) - {"seed"}
        unknown = set(self.params) - allowed
        if unknown:
            raise InvalidArgument(
                f"{self.algorithm} does not take {sorted(unknown)}; allowed: {sorted(allowed)}"
            )
        object.__setattr__(self, "params", dict(self.params))

    def to_dict(self):
        return {"algorithm": self.algorithm, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, d):
        return cls(d["algorithm"], d.get("params", {}), int(d.get("seed", 0)))


def make_classifier(spec):
    cls = ALGORITHMS[spec.algorithm]
    params = dict(spec.params)
    if "seed" in cls().get_params():
        params["seed"] = spec.seed
    return cls(**params)


def with_pca(estimator, n_components=6):
    """Chain a PCA projection (fit on the training rows only) in front of ``estimator``."""
    return Pipeline([("pca", PCA(n_components)), ("model", estimator)])


__all__ = [
    "ALGORITHMS",
    "AdaBoostClassifier",
    "ClassifierSpec",
    "KNNClassifier",
    "LDAClassifier",
    "LinearSVMClassifier",
    "MLPClassifier",
    "QDAClassifier",
    "RandomForestClassifier",
    "RbfSVMClassifier",
    "make_classifier",
    "with_pca",
]
