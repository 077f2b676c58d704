"""Shared fixtures and synthetic data generators."""

import numpy as np
import pytest
import scipy.sparse as sp

from core.dataset import Dataset
from core.logger import relief_logger


def gaussian_blobs(n=300, centers=3, dim=10, spread=0.5, distance=20.0, seed=0):
    """Well-separated isotropic blobs; returns (X, y)."""
    rng = np.random.default_rng(seed)
    means = rng.normal(size=(centers, dim))
    means *= distance / np.linalg.norm(means, axis=1, keepdims=True)
    y = np.arange(n) % centers
    X = means[y] + rng.normal(scale=spread, size=(n, dim))
    return X, y


def hypercube(n, dim, seed=0):
    return np.random.default_rng(seed).uniform(size=(n, dim))


def informative_mcc(n=500, informative=10, noise=90, shift=1.0, seed=0):
    """Two classes; the first ``informative`` features shift with the class."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    signal = rng.normal(size=(n, informative)) + shift * (2 * y[:, None] - 1)
    X = np.hstack([signal, rng.normal(size=(n, noise))])
    return Dataset(sp.csr_matrix(X), "mcc", classes=y), np.arange(informative)


def informative_mlc(n=300, n_features=50, n_labels=3, seed=0):
    """Label l is on when feature l exceeds 0.5; the other features are noise."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, n_features))
    Y = (X[:, :n_labels] > 0.5).astype(np.float64)
    return Dataset(sp.csr_matrix(X), "mlc", labels=sp.csr_matrix(Y)), np.arange(n_labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_mcc():
    """20 x 5 dense dataset with three classes."""
    generator = np.random.default_rng(7)
    X = generator.normal(size=(20, 5))
    y = np.array([0, 1, 2, 0, 1] * 4)
    return Dataset(sp.csr_matrix(X), "mcc", classes=y)


@pytest.fixture
def small_mlc():
    generator = np.random.default_rng(11)
    X = generator.uniform(size=(40, 6))
    Y = (generator.uniform(size=(40, 4)) > 0.6).astype(float)
    return Dataset(sp.csr_matrix(X), "mlc", labels=sp.csr_matrix(Y))


@pytest.fixture(autouse=True)
def _drain_manifest_warnings():
    relief_logger.drain_warnings()
    yield
    relief_logger.drain_warnings()
