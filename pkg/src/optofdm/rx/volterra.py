"""Truncated second-order Volterra equalizer trained with LMS.

The quadratic kernel is kept in its symmetric, upper-triangular form
(``l1 <= l2``), so a memory of L taps gives L linear and L(L+1)/2 quadratic
weights.
"""

from dataclasses import dataclass, replace

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ..exceptions import ContractError, DivergenceError
from ..validation import check_waveform

DIVERGENCE_FACTOR = 1e3


def quadratic_pairs(L):
    """Index arrays ``(l1, l2)`` of the upper-triangular kernel, row-major."""
    l1, l2 = np.triu_indices(L)
    return l1.astype(np.int64), l2.astype(np.int64)


@dataclass(frozen=True)
class VolterraWeights:
    w1: np.ndarray
    w2: np.ndarray
    mu1: float = 0.0
    mu2: float = 0.0
    input_scale: float = 1.0
    output_scale: float = 1.0

    def __post_init__(self):
        w1 = np.asarray(self.w1, dtype=np.float64)
        w2 = np.asarray(self.w2, dtype=np.float64)
        L = w1.size
        if w2.size != L * (L + 1) // 2:
            raise ContractError(f"quadratic kernel needs {L * (L + 1) // 2} taps, got {w2.size}")
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "w2", w2)

    @property
    def memory(self):
        return self.w1.size

    @classmethod
    def zeros(cls, L, **kw):
        return cls(np.zeros(L), np.zeros(L * (L + 1) // 2), **kw)

    @classmethod
    def identity(cls, L, delay=0, **kw):
        w = cls.zeros(L, **kw)
        w.w1[delay] = 1.0
        return w

    def quadratic_matrix(self):
        """The quadratic kernel as an upper-triangular L x L matrix."""
        m = np.zeros((self.memory, self.memory))
        m[np.triu_indices(self.memory)] = self.w2
        return m

    def denormalized(self):
        """Equivalent weights acting directly on un-normalized samples."""
        g = self.output_scale / self.input_scale
        return replace(self, w1=self.w1 * g, w2=self.w2 * g / self.input_scale,
                       input_scale=1.0, output_scale=1.0)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.w1)) and np.all(np.isfinite(self.w2)))


@dataclass(frozen=True)
class EqualizerReport:
    converged: bool
    final_mse: float
    initial_mse: float
    epochs_used: int
    weight_snapshot: VolterraWeights
    mse_per_epoch: tuple = ()

    def to_text(self):
        w = self.weight_snapshot
        lines = [
            f"converged = {str(self.converged).lower()}",
            f"initial_mse = {self.initial_mse!r}",
            f"final_mse = {self.final_mse!r}",
            f"epochs_used = {self.epochs_used}",
            f"memory = {w.memory}",
            f"mu1 = {w.mu1!r}",
            f"mu2 = {w.mu2!r}",
            f"input_scale = {w.input_scale!r}",
            f"output_scale = {w.output_scale!r}",
            "w1 = " + " ".join(repr(float(v)) for v in w.w1),
            "w2 = " + " ".join(repr(float(v)) for v in w.w2),
        ]
        return "\n".join(lines) + "\n"


def _delay_lines(x, L):
    n = x.size
    D = np.zeros((L, n))
    for l in range(L):
        D[l, l:] = x[: n - l]
    return D


def volterra_apply(x, w: VolterraWeights) -> np.ndarray:
    """Evaluate the truncated Volterra series; history before ``x[0]`` is zero."""
    x = check_waveform(x, name="x", min_samples=w.memory)
    xs = x / w.input_scale if w.input_scale != 1.0 else x
    D = _delay_lines(xs, w.memory)
    y = w.w1 @ D
    l1, l2 = quadratic_pairs(w.memory)
    for p in range(l1.size):
        if w.w2[p] != 0.0:
            y += w.w2[p] * (D[l1[p]] * D[l2[p]])
    return y * w.output_scale if w.output_scale != 1.0 else y


@njit(cache=True)
def _lms_kernel(x, d, w1, w2, l1, l2, mu1, mu2, epochs, window, limit_factor):
    n = x.size
    L = w1.size
    P = w2.size
    hist = np.zeros(L)
    mse = np.zeros(epochs)
    first = -1.0
    last = 0.0
    status = 0
    for e in range(epochs):
        hist[:] = 0.0
        acc = 0.0
        wacc = 0.0
        for k in range(n):
            for l in range(L - 1, 0, -1):
                hist[l] = hist[l - 1]
            hist[0] = x[k]
            y = 0.0
            for l in range(L):
                y += w1[l] * hist[l]
            for p in range(P):
                y += w2[p] * hist[l1[p]] * hist[l2[p]]
            err = d[k] - y
            se = err * err
            acc += se
            wacc += se
            if mu1 != 0.0:
                g = mu1 * err
                for l in range(L):
                    w1[l] += g * hist[l]
            if mu2 != 0.0:
                g = mu2 * err
                for p in range(P):
                    w2[p] += g * hist[l1[p]] * hist[l2[p]]
            if (k + 1) % window == 0:
                wm = wacc / window
                wacc = 0.0
                if first < 0.0:
                    first = wm
                last = wm
                if not np.isfinite(wm) or wm > limit_factor * max(first, 1e-300):
                    mse[e] = acc / (k + 1)
                    return mse, first, wm, e + 1, 1
        mse[e] = acc / n
    return mse, first, last, epochs, status


@njit(cache=True)
def _lms_regressor_kernel(phi, d, w, mu, epochs, window, limit_factor):
    # same recursion as _lms_kernel, on precomputed regressor rows
    n, P = phi.shape
    mse = np.zeros(epochs)
    first = -1.0
    last = 0.0
    for e in range(epochs):
        acc = 0.0
        wacc = 0.0
        for k in range(n):
            y = 0.0
            for p in range(P):
                y += w[p] * phi[k, p]
            err = d[k] - y
            se = err * err
            acc += se
            wacc += se
            for p in range(P):
                w[p] += mu[p] * err * phi[k, p]
            if (k + 1) % window == 0:
                wm = wacc / window
                wacc = 0.0
                if first < 0.0:
                    first = wm
                last = wm
                if not np.isfinite(wm) or wm > limit_factor * max(first, 1e-300):
                    mse[e] = acc / (k + 1)
                    return mse, first, wm, e + 1, 1
        mse[e] = acc / n
    return mse, first, last, epochs, 0


def band_project(x, fft_size, band, cp_len=0, offset=0):
    """Keep only bins ``1..band`` (and mirrors) of every frame along the last axis.

    Frames are ``cp_len + fft_size`` long and start at ``offset``; cyclic
    prefixes and samples outside whole frames are set to zero.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    frame = cp_len + fft_size
    n_frames = (x.shape[-1] - offset) // frame
    if n_frames <= 0:
        return out
    stop = offset + n_frames * frame
    seg = x[..., offset:stop].reshape(x.shape[:-1] + (n_frames, frame))[..., cp_len:]
    spec = np.fft.rfft(seg, axis=-1)
    spec[..., 0] = 0.0
    spec[..., band + 1:] = 0.0
    body = np.fft.irfft(spec, n=fft_size, axis=-1)
    view = out[..., offset:stop].reshape(x.shape[:-1] + (n_frames, frame))
    view[..., cp_len:] = body
    out[..., offset:stop] = view.reshape(x.shape[:-1] + (n_frames * frame,))
    return out


def _rms(x):
    r = float(np.sqrt(np.mean(x**2)))
    return r if r > 0 else 1.0


def volterra_train(x, desired, L=10, mu1=1e-3, mu2=1e-4, epochs=20, *,
                   normalize=True, init=None, window=None, inband=None):
    """Per-sample LMS adaptation of both kernels.

    Returns ``(weights, report)``. With ``normalize`` the input and the target
    are divided by their RMS first; the returned weights carry those scales so
    :func:`volterra_apply` works on raw samples.

    ``inband`` is an optional dict of :func:`band_project` arguments. When
    given, every regressor column and the target are projected onto the OFDM
    data band before the LMS recursion, so the weights minimize the error a
    DFT receiver actually sees instead of the full-band waveform error.
    """
    x = check_waveform(x, name="x")
    d = check_waveform(desired, name="desired")
    if x.size != d.size:
        raise ContractError("x and desired must have the same length")
    if x.size < 10 * L:
        raise ContractError(f"training needs at least {10 * L} samples, got {x.size}")
    in_scale = _rms(x) if normalize else 1.0
    out_scale = _rms(d) if normalize else 1.0
    if init is None:
        w = VolterraWeights.zeros(L)
    else:
        w = init
        if w.memory != L:
            raise ContractError("initial weights have the wrong memory length")
    w1, w2 = w.w1.copy(), w.w2.copy()
    window = window or min(x.size, max(10 * L, x.size // 20))
    l1, l2 = quadratic_pairs(L)
    xs, ds = x / in_scale, d / out_scale
    if inband is None:
        mse, first, last, used, status = _lms_kernel(
            xs, ds, w1, w2, l1, l2, float(mu1), float(mu2),
            int(epochs), int(window), DIVERGENCE_FACTOR,
        )
    else:
        lines = _delay_lines(xs, L)
        phi = band_project(np.vstack([lines, lines[l1] * lines[l2]]), **inband)
        mu = np.concatenate([np.full(L, float(mu1)), np.full(l1.size, float(mu2))])
        w = np.concatenate([w1, w2])
        mse, first, last, used, status = _lms_regressor_kernel(
            np.ascontiguousarray(phi.T), band_project(ds, **inband), w, mu,
            int(epochs), int(window), DIVERGENCE_FACTOR,
        )
        w1, w2 = w[:L], w[L:]
    weights = VolterraWeights(w1, w2, mu1, mu2, in_scale, out_scale)
    if status or not weights.is_finite():
        raise DivergenceError(
            f"LMS diverged in epoch {used}: windowed MSE {last:.3g} vs initial {first:.3g}; "
            "reduce mu1/mu2"
        )
    identity = np.array_equal(x, d)
    report = EqualizerReport(
        converged=bool(identity or last < 0.5 * first),
        final_mse=float(last),
        initial_mse=float(first),
        epochs_used=int(used),
        weight_snapshot=weights,
        mse_per_epoch=tuple(float(m) for m in mse[:used]),
    )
    return weights, report


class VolterraEqualizer(RegressorMixin, BaseEstimator):
    """Time-domain second-order Volterra equalizer.

    ``fit(x, y)`` trains on a received waveform ``x`` and the waveform ``y`` it
    should reproduce; ``predict(x)`` returns the equalized waveform aligned
    with ``x``. ``delay`` lets the causal filter use ``delay`` future samples.
    Setting ``band`` (with ``fft_size``) trains on the in-band error only, see
    :func:`volterra_train`.
    """

    def __init__(self, memory=10, mu1=1e-3, mu2=1e-4, n_epochs=20, delay=0,
                 normalize=True, center=True, init="identity", fft_size=None, band=None,
                 cp_len=0):
        self.memory = memory
        self.mu1 = mu1
        self.mu2 = mu2
        self.n_epochs = n_epochs
        self.delay = delay
        self.normalize = normalize
        self.center = center
        self.init = init
        self.fft_size = fft_size
        self.band = band
        self.cp_len = cp_len

    def fit(self, X, y):
        x = check_waveform(X, name="X")
        d = check_waveform(y, name="y")
        if not 0 <= self.delay < self.memory:
            raise ContractError("delay must lie in [0, memory)")
        self.x_mean_ = float(np.mean(x)) if self.center else 0.0
        self.y_mean_ = float(np.mean(d)) if self.center else 0.0
        x = x - self.x_mean_
        d = d - self.y_mean_
        if self.delay:
            d = np.concatenate([np.zeros(self.delay), d[: -self.delay]])
        inband = None
        if self.band is not None:
            if self.fft_size is None:
                raise ContractError("in-band training needs fft_size")
            # output frames start ``delay`` samples late
            inband = dict(fft_size=self.fft_size, band=self.band, cp_len=self.cp_len,
                          offset=self.delay)
        init = None
        if self.init == "identity":
            init = VolterraWeights.identity(self.memory, self.delay)
        self.weights_, self.report_ = volterra_train(
            x, d, self.memory, self.mu1, self.mu2, self.n_epochs,
            normalize=self.normalize, init=init, inband=inband,
        )
        return self

    def predict(self, X):
        check_is_fitted(self, "weights_")
        x = check_waveform(X, name="X") - self.x_mean_
        if self.delay:
            x = np.concatenate([x, np.zeros(self.delay)])
        return volterra_apply(x, self.weights_)[self.delay:] + self.y_mean_

    def transform(self, X):
        return self.predict(X)

    @property
    def n_linear_taps_(self):
        return self.memory

    @property
    def n_quadratic_taps_(self):
        return self.memory * (self.memory + 1) // 2
