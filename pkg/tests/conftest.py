import numpy as np
import pytest


def brute_dft(x):
    """Direct O(N^2) DFT sum, independent of numpy.fft."""
    x = np.asarray(x, dtype=np.complex128)
    N = x.shape[-1]
    n = np.arange(N)
    W = np.exp(-2j * np.pi * np.outer(n, n) / N)
    return x @ W.T


def brute_idft(X):
    X = np.asarray(X, dtype=np.complex128)
    N = X.shape[-1]
    n = np.arange(N)
    W = np.exp(2j * np.pi * np.outer(n, n) / N)
    return (X @ W.T) / N


def random_qpsk(rng, shape):
    return (rng.choice([-1.0, 1.0], shape) + 1j * rng.choice([-1.0, 1.0], shape)) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
