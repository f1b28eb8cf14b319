import numpy as np
import pytest

from whiskyspec.core import dataset_to_matrix
from whiskyspec.neural.layers import MaxPool1D, ReLU
from whiskyspec.synthgen import synth_paper_shaped_dataset


@pytest.fixture(scope="session")
def brand_id():
    return synth_paper_shaped_dataset(preset="BrandID", seed=7)


@pytest.fixture(scope="session")
def small_brands():
    """5 brands x 12 replicates through vials: quick to fit anything on."""
    return synth_paper_shaped_dataset(preset="BrandID", seed=3, n_brands=5, replicates=12)


@pytest.fixture(scope="session")
def small_matrix(small_brands):
    X, y, _, _ = dataset_to_matrix(small_brands)
    return X, y


@pytest.fixture
def blobs():
    """Three well separated Gaussian clusters in 8 dimensions."""
    rng = np.random.default_rng(11)
    centers = rng.normal(scale=6.0, size=(3, 8))
    y = np.repeat(np.arange(3), 30)
    X = centers[y] + rng.normal(size=(90, 8))
    return X, y


def _activation_pattern(net, X):
    net.forward(X)
    pattern = []
    for _, layer in net._all_layers():
        if isinstance(layer, ReLU):
            pattern.append(layer._mask.copy())
        elif isinstance(layer, MaxPool1D):
            pattern.append(layer._arg.copy())
    return pattern


def _same_pattern(a, b):
    return all(np.array_equal(x, y) for x, y in zip(a, b))


def gradient_check(net, X, targets, weights=None, h=1e-5, min_h=1e-9):
    """Worst per-tensor relative error between backprop and central differences.

    ReLU and max pooling make the loss piecewise smooth. When a +-h step
    changes any activation pattern the difference quotient straddles a kink,
    so that coordinate's step is halved until it no longer does. A coordinate
    still straddling a kink at ``min_h`` counts as a failure (error 1).
    Returns ``(worst_error, n_parameters, n_shrunk_steps)``.
    """
    analytic = {lid: {k: g.copy() for k, g in t.items()}
                for lid, t in net.backward(net.forward(X), targets, weights).items()}
    base = _activation_pattern(net, X)
    worst, n_params, shrunk = 0.0, 0, 0
    for lid, tensors in net.parameters().items():
        for k, value in tensors.items():
            flat = value.reshape(-1)
            numeric = np.zeros(flat.size)
            for i in range(flat.size):
                old, step = flat[i], h
                while True:
                    flat[i] = old + step
                    up_pattern = _activation_pattern(net, X)
                    up = net.loss(net.forward(X), targets, weights)[0]
                    flat[i] = old - step
                    down_pattern = _activation_pattern(net, X)
                    down = net.loss(net.forward(X), targets, weights)[0]
                    flat[i] = old
                    if _same_pattern(base, up_pattern) and _same_pattern(base, down_pattern):
                        break
                    step /= 2.0
                    shrunk += 1
                    if step < min_h:
                        return 1.0, n_params, shrunk
                numeric[i] = (up - down) / (2.0 * step)
            a = analytic[lid][k].reshape(-1)
            denom = max(np.linalg.norm(a) + np.linalg.norm(numeric), 1e-12)
            worst = max(worst, float(np.linalg.norm(a - numeric) / denom))
            n_params += flat.size
    return worst, n_params, shrunk


@pytest.fixture
def finite_difference_check():
    return gradient_check


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record and print one pass/fail line for an acceptance criterion."""

    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
