"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

import numpy as np
from sklearn.utils import check_array

from .exceptions import ConfigError, ContractError


def check_waveform(x, *, name="waveform", min_samples=1, dtype=np.float64):
    """Return ``x`` as a finite 1-D float array.

    Thin wrapper around :func:`sklearn.utils.check_array` that accepts
    ``RealWaveform`` objects as well as plain sequences.
    """
    samples = getattr(x, "samples", x)
    arr = check_array(
        np.asarray(samples),
        ensure_2d=False,
        dtype=dtype,
        ensure_all_finite=True,
        ensure_min_samples=0,
        input_name=name,
    )
    if arr.ndim != 1:
        raise ContractError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_samples:
        raise ContractError(f"{name} needs at least {min_samples} samples, got {arr.size}")
    return arr


def check_complex(x, *, name="samples"):
    arr = np.asarray(getattr(x, "samples", x), dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains NaN or Inf")
    return arr


def check_bits(bits):
    bits = np.asarray(bits)
    if bits.ndim != 1:
        bits = bits.ravel()
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise ValueError("bits must contain only 0 and 1")
    return bits.astype(np.uint8)


def is_power_of_two(n):
    return isinstance(n, (int, np.integer)) and n > 0 and (n & (n - 1)) == 0


def check_positive(value, name):
    if not value > 0:
        raise ConfigError(f"{name} must be positive, got {value!r}")
    return value


def check_non_negative(value, name):
    if not value >= 0:
        raise ConfigError(f"{name} must be non-negative, got {value!r}")
    return value
