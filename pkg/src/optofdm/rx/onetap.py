"""Per-subcarrier (one-tap) frequency-domain equalizer."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..exceptions import ContractError, DeadSubcarrierError

DEAD_GAIN = 1e-12


@dataclass(frozen=True)
class OneTapBank:
    bins: np.ndarray
    gains: np.ndarray

    def full(self, N):
        """Gains on a length-N Hermitian grid; unequalized bins are NaN."""
        H = np.full(N, np.nan, dtype=np.complex128)
        H[self.bins] = self.gains
        H[N - self.bins] = np.conj(self.gains)
        return H


def one_tap_estimate(training_rx, training_tx, bins, method="ls") -> OneTapBank:
    """Channel gain on each bin from known training spectra.

    ``method="mean_ratio"`` averages ``Y/X`` over frames; ``"ls"`` (default) uses
    ``sum(Y X*) / sum(|X|^2)``, which is identical for constant-modulus training
    and robust when some reference bins are small.
    """
    Y = np.atleast_2d(np.asarray(training_rx))
    X = np.atleast_2d(np.asarray(training_tx))
    bins = np.asarray(bins, dtype=int)
    if Y.shape != X.shape or Y.shape[0] < 1:
        raise ContractError("need >= 1 training frame with matching rx/tx shapes")
    Yb, Xb = Y[:, bins], X[:, bins]
    if method == "mean_ratio":
        if np.any(Xb == 0):
            raise ContractError("training symbols must be nonzero on every occupied bin")
        H = np.mean(Yb / Xb, axis=0)
    elif method == "ls":
        den = np.sum(np.abs(Xb) ** 2, axis=0)
        if np.any(den == 0):
            raise ContractError("training symbols must be nonzero on every occupied bin")
        H = np.sum(Yb * np.conj(Xb), axis=0) / den
    else:
        raise ValueError(f"unknown method {method!r}")
    dead = bins[np.abs(H) < DEAD_GAIN]
    if dead.size:
        raise DeadSubcarrierError(dead)
    return OneTapBank(bins, H)


def one_tap_apply(frames, bank: OneTapBank) -> np.ndarray:
    """Divide each equalized bin by its gain; every other bin (and its mirror) is zeroed.

    ``frames`` are length-N spectra; the result is Hermitian when the input is.
    """
    Y = np.atleast_2d(np.asarray(frames, dtype=np.complex128))
    N = Y.shape[-1]
    out = np.zeros_like(Y)
    eq = Y[:, bank.bins] / bank.gains
    out[:, bank.bins] = eq
    out[:, N - bank.bins] = np.conj(eq)
    return out


class OneTapEqualizer(TransformerMixin, BaseEstimator):
    """sklearn-style wrapper: ``fit(Y_train, X_train)`` then ``transform(Y)``."""

    def __init__(self, bins=None, method="ls"):
        self.bins = bins
        self.method = method

    def fit(self, X, y):
        X = np.atleast_2d(X)
        bins = self.bins if self.bins is not None else np.arange(1, X.shape[-1] // 2)
        self.bank_ = one_tap_estimate(X, y, bins, self.method)
        return self

    def transform(self, X):
        check_is_fitted(self, "bank_")
        return one_tap_apply(X, self.bank_)
