"""Real-valued OFDM framing primitives.

DFT convention: forward transform uses ``exp(-2j*pi*k*n/N)`` without scaling,
the inverse is scaled by ``1/N`` (numpy's default). With this convention
Parseval reads ``sum|x|^2 = sum|X|^2 / N`` and clipping a single ACO layer
halves its own bins exactly.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .exceptions import ConfigError, ContractError
from .validation import is_power_of_two

HERMITIAN_RTOL = 1e-9


class Format(str, Enum):
    DCO = "dco"
    LACO = "laco"


class Unit(str, Enum):
    NORMALIZED = "normalized"
    VOLTS = "volts"
    MILLIAMPS = "milliamps"


@dataclass(frozen=True)
class LayerSpec:
    """One ACO layer: subcarriers ``2**(l-1) * (2n+1)`` inside the band."""

    layer_index: int
    subcarriers: tuple

    @property
    def symbols_per_frame(self):
        return len(self.subcarriers)

    def antiperiod(self, fft_size):
        """Samples between a layer value and its sign-flipped twin, ``N / 2**l``."""
        return fft_size >> self.layer_index

    @classmethod
    def build(cls, layer_index, band):
        return cls(layer_index, tuple(layer_subcarriers(layer_index, band)))


@dataclass(frozen=True)
class OfdmConfig:
    fft_size: int = 256
    data_band: int = 63
    format: Format = Format.DCO
    layers: tuple = ()
    cp_len: int = 0
    sample_rate: float = 8.75e9

    def __post_init__(self):
        object.__setattr__(self, "format", Format(self.format))
        N, B = self.fft_size, self.data_band
        if not is_power_of_two(N):
            raise ConfigError(f"fft_size must be a power of two, got {N}")
        if not 1 <= B <= N // 2 - 1:
            raise ConfigError(f"data_band must lie in [1, {N // 2 - 1}], got {B}")
        if not 0 <= self.cp_len < N:
            raise ConfigError(f"cp_len must satisfy 0 <= cp_len < {N}, got {self.cp_len}")
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be positive")
        if self.format is Format.LACO:
            if not self.layers:
                raise ConfigError("LACO format needs at least one layer")
            seen = set()
            for layer in self.layers:
                idx = set(layer.subcarriers)
                if idx & seen:
                    raise ConfigError(f"layer {layer.layer_index} overlaps a previous layer")
                if idx and (min(idx) < 1 or max(idx) > B):
                    raise ConfigError(f"layer {layer.layer_index} leaves the band [1, {B}]")
                seen |= idx

    @classmethod
    def dco(cls, fft_size=256, data_band=63, cp_len=0, sample_rate=8.75e9):
        return cls(fft_size, data_band, Format.DCO, (), cp_len, sample_rate)

    @classmethod
    def laco(cls, fft_size=256, data_band=64, n_layers=3, cp_len=0, sample_rate=10e9):
        layers = tuple(LayerSpec.build(l, data_band) for l in range(1, n_layers + 1))
        return cls(fft_size, data_band, Format.LACO, layers, cp_len, sample_rate)

    @property
    def data_subcarriers(self):
        """Occupied data bins, in the order bits are mapped onto them."""
        if self.format is Format.DCO:
            return np.arange(1, self.data_band + 1)
        return np.concatenate([np.asarray(l.subcarriers, dtype=int) for l in self.layers])

    @property
    def n_data_subcarriers(self):
        return int(self.data_subcarriers.size)

    @property
    def symbol_len(self):
        return self.fft_size + self.cp_len

    @property
    def bit_rate(self):
        """QPSK payload rate in bit/s: 2 bits x data subcarriers x OFDM symbol rate."""
        return 2 * self.n_data_subcarriers * self.sample_rate / self.symbol_len


@dataclass
class SymbolFrame:
    """Complex symbols on a set of subcarriers, one row per OFDM symbol."""

    indices: np.ndarray
    symbols: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int).ravel()
        sym = np.asarray(self.symbols, dtype=np.complex128)
        if sym.ndim == 1:
            sym = sym.reshape(-1, self.indices.size) if self.indices.size else sym.reshape(0, 0)
        self.symbols = sym
        if self.symbols.size and self.symbols.shape[1] != self.indices.size:
            raise ConfigError(
                f"symbols have {self.symbols.shape[1]} columns for {self.indices.size} subcarriers"
            )

    @property
    def n_ofdm_symbols(self):
        return self.symbols.shape[0]


@dataclass
class RealWaveform:
    samples: np.ndarray
    sample_rate: float = 1.0
    unit: Unit = Unit.NORMALIZED
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        self.unit = Unit(self.unit)
        if not np.all(np.isfinite(self.samples)):
            raise ContractError("RealWaveform samples must be finite")

    def __len__(self):
        return self.samples.size


def _as_2d(x):
    x = np.asarray(x)
    return (x[np.newaxis], True) if x.ndim == 1 else (x, False)


def hermitian_map(frame: SymbolFrame, N: int) -> np.ndarray:
    """Place symbols on bins ``k`` and their conjugates on ``N-k``.

    Returns an array of shape ``(n_ofdm_symbols, N)``; bins 0 and N/2 stay zero.
    """
    idx = frame.indices
    if idx.size and (idx.min() < 1 or idx.max() > N // 2 - 1):
        raise ConfigError(f"subcarrier indices must lie in [1, {N // 2 - 1}]")
    if np.unique(idx).size != idx.size:
        raise ConfigError("duplicate subcarrier index in frame")
    n_sym = frame.symbols.shape[0] if frame.symbols.size else max(frame.symbols.shape[0], 1)
    spec = np.zeros((n_sym, N), dtype=np.complex128)
    if idx.size:
        spec[:, idx] = frame.symbols
        spec[:, N - idx] = np.conj(frame.symbols)
    return spec


def is_hermitian(spectrum, rtol=HERMITIAN_RTOL):
    spec, _ = _as_2d(spectrum)
    N = spec.shape[-1]
    mirror = np.conj(spec[:, (-np.arange(N)) % N])
    scale = max(np.max(np.abs(spec), initial=0.0), 1e-300)
    return bool(np.max(np.abs(spec - mirror), initial=0.0) <= rtol * scale)


def idft_real(spectrum) -> np.ndarray:
    """Inverse DFT of a Hermitian spectrum (last axis), returning real samples."""
    spec = np.asarray(spectrum, dtype=np.complex128)
    x = np.fft.ifft(spec, axis=-1)
    peak = np.max(np.abs(x), initial=0.0)
    if peak > 0 and np.max(np.abs(x.imag)) > HERMITIAN_RTOL * peak:
        raise ContractError("spectrum is not Hermitian-symmetric; IDFT output is complex")
    return np.ascontiguousarray(x.real)


def dft(waveform, N: Optional[int] = None) -> np.ndarray:
    """Forward DFT of each length-N block of ``waveform``.

    A 1-D waveform whose length is a multiple of N is reshaped into one row per
    OFDM symbol. 2-D input is transformed along its last axis.
    """
    x = np.asarray(getattr(waveform, "samples", waveform), dtype=np.float64)
    if N is not None and x.ndim == 1:
        if x.size % N:
            raise ConfigError(f"waveform length {x.size} is not a multiple of N={N}")
        x = x.reshape(-1, N)
    return np.fft.fft(x, axis=-1)


def layer_subcarriers(l: int, B: int) -> list:
    """Sorted subcarriers ``{2**(l-1) * (2n+1)}`` that lie in ``[1, B]``."""
    if l < 1:
        raise ConfigError(f"layer index must be >= 1, got {l}")
    step = 1 << (l - 1)
    return list(range(step, B + 1, 2 * step))


def clip_negative(w):
    x = np.asarray(getattr(w, "samples", w), dtype=np.float64)
    return np.maximum(x, 0.0)


def add_cp(w, cp_len: int, symbol_len: Optional[int] = None) -> np.ndarray:
    """Prefix every symbol with a copy of its last ``cp_len`` samples.

    ``symbol_len`` splits a multi-symbol waveform; by default ``w`` is one symbol.
    """
    x = np.asarray(getattr(w, "samples", w), dtype=np.float64)
    n = symbol_len or x.shape[-1]
    if not 0 <= cp_len < n:
        raise ConfigError(f"cp_len must satisfy 0 <= cp_len < {n}, got {cp_len}")
    if x.size % n:
        raise ConfigError(f"waveform length {x.size} is not a multiple of {n}")
    blocks = x.reshape(-1, n)
    out = np.concatenate([blocks[:, n - cp_len:], blocks], axis=1)
    return out.ravel() if x.ndim == 1 else out


def remove_cp(w, cp_len: int, symbol_len: Optional[int] = None) -> np.ndarray:
    """Inverse of :func:`add_cp`; ``symbol_len`` is the length *without* prefix."""
    x = np.asarray(getattr(w, "samples", w), dtype=np.float64)
    if symbol_len is None:
        symbol_len = x.shape[-1] - cp_len
    if not 0 <= cp_len < symbol_len:
        raise ConfigError(f"cp_len must satisfy 0 <= cp_len < {symbol_len}, got {cp_len}")
    n = symbol_len + cp_len
    if x.size % n:
        raise ConfigError(f"waveform length {x.size} is not a multiple of {n}")
    out = x.reshape(-1, n)[:, cp_len:]
    return out.ravel() if x.ndim == 1 else out


def frames_to_waveform(frames, cp_len=0):
    """Flatten ``(n_symbols, N)`` time-domain frames into a serial waveform with CP."""
    frames = np.asarray(frames, dtype=np.float64)
    return add_cp(frames.ravel(), cp_len, frames.shape[-1]) if cp_len else frames.ravel()


def waveform_to_frames(x, N, cp_len=0):
    x = np.asarray(x, dtype=np.float64)
    return remove_cp(x, cp_len, N).reshape(-1, N) if cp_len else x.reshape(-1, N)


def layer_sets_partition(B: int, n_layers: Optional[int] = None) -> Sequence[list]:
    n_layers = n_layers or int(np.log2(B)) + 1
    return [layer_subcarriers(l, B) for l in range(1, n_layers + 1)]
