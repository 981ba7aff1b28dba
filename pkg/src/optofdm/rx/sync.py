"""Preamble-based frame synchronization."""

import numpy as np
from scipy.signal import correlate

from ..exceptions import SyncError
from ..validation import check_waveform

MIN_PSR = 2.0


def normalized_xcorr(rx, preamble):
    """Normalized cross-correlation of ``preamble`` against every window of ``rx``."""
    r = check_waveform(rx, name="rx")
    p = check_waveform(preamble, name="preamble")
    if r.size < p.size:
        raise SyncError("received waveform is shorter than the preamble")
    p = p - p.mean()
    n = p.size
    num = correlate(r, p, mode="valid", method="fft")
    c1 = np.concatenate([[0.0], np.cumsum(r)])
    c2 = np.concatenate([[0.0], np.cumsum(r * r)])
    s1 = c1[n:] - c1[:-n]
    s2 = c2[n:] - c2[:-n]
    energy = np.maximum(s2 - s1 * s1 / n, 0.0)
    den = np.sqrt(energy) * np.linalg.norm(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / den, 0.0)


def synchronize(rx, preamble, exclude=16, min_psr=MIN_PSR, return_psr=False):
    """Sample offset of ``preamble`` inside ``rx`` (argmax of normalized xcorr).

    Raises :class:`SyncError` when the peak is less than ``min_psr`` times the
    largest correlation more than ``exclude`` samples away from it.
    """
    c = normalized_xcorr(rx, preamble)
    peak = int(np.argmax(c))
    mask = np.abs(np.arange(c.size) - peak) > exclude
    side = float(np.max(np.abs(c[mask]))) if np.any(mask) else 0.0
    psr = np.inf if side == 0 else float(c[peak]) / side
    if not psr >= min_psr:
        raise SyncError(f"peak-to-sidelobe ratio {psr:.2f} below {min_psr}")
    return (peak, psr) if return_psr else peak
