"""Hand-differentiated FCN / CNN / hybrid networks for spectra."""
from .estimators import SpectralNet, SpectralNetClassifier, SpectralNetRegressor
from .network import (
    ARCHES,
    BRAND,
    CNN,
    ETHANOL,
    FCN,
    HEADS,
    HPM,
    METHANOL,
    Network,
    NetworkSpec,
    TrainConfig,
    TrainTrace,
    build_network,
    train,
)

__all__ = [
    "ARCHES", "BRAND", "CNN", "ETHANOL", "FCN", "HEADS", "HPM", "METHANOL",
    "Network", "NetworkSpec", "SpectralNet", "SpectralNetClassifier",
    "SpectralNetRegressor", "TrainConfig", "TrainTrace", "build_network", "train",
]
