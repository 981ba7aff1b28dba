"""DCO-OFDM and layered ACO-OFDM transmitters."""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (
    Format,
    OfdmConfig,
    RealWaveform,
    SymbolFrame,
    Unit,
    clip_negative,
    frames_to_waveform,
    hermitian_map,
    idft_real,
)
from .exceptions import ConfigError
from .validation import check_bits

SQRT_HALF = 1 / np.sqrt(2)

# bit pair -> symbol: first bit picks the imaginary sign, second the real sign.
QPSK_GRAY_MAP = {
    (0, 0): complex(1, 1) * SQRT_HALF,
    (0, 1): complex(-1, 1) * SQRT_HALF,
    (1, 1): complex(-1, -1) * SQRT_HALF,
    (1, 0): complex(1, -1) * SQRT_HALF,
}


@dataclass(frozen=True)
class TxParams:
    clip_sigma: float = 4.0
    drive_pp: float = 20.0  # mA peak-to-peak for a full-scale (1 V p-p) drive

    def __post_init__(self):
        if not self.clip_sigma > 0:
            raise ConfigError("clip_sigma must be positive")
        if not self.drive_pp > 0:
            raise ConfigError("drive_pp must be positive")

    @property
    def ma_per_volt(self):
        # full scale is -0.5 V .. +0.5 V
        return self.drive_pp


@dataclass(frozen=True)
class FramePlan:
    n_frames: int = 256
    training_frames: int = 32
    training_seed: int = 20170101

    def __post_init__(self):
        if self.training_frames < 0 or self.n_frames <= self.training_frames:
            raise ConfigError("need 0 <= training_frames < n_frames")

    @property
    def payload_frames(self):
        return self.n_frames - self.training_frames

    def payload_bits(self, cfg: OfdmConfig):
        return 2 * cfg.n_data_subcarriers * self.payload_frames

    @classmethod
    def for_min_bits(cls, cfg: OfdmConfig, min_bits, training_frames=32, **kw):
        per_frame = 2 * cfg.n_data_subcarriers
        payload = -(-int(min_bits) // per_frame)
        return cls(n_frames=payload + training_frames, training_frames=training_frames, **kw)


@dataclass
class TxBurst:
    """Transmitter output plus everything the receiver may legitimately know."""

    waveform: RealWaveform        # drive in volts, CP included
    scale: float                  # volts per unit of the unscaled IDFT waveform
    frame: SymbolFrame            # all frames, training first
    unscaled: np.ndarray          # (n_frames, N) time-domain frames before scaling
    cfg: OfdmConfig
    plan: FramePlan

    @property
    def training_symbols(self):
        return self.frame.symbols[: self.plan.training_frames]

    @property
    def payload_symbols(self):
        return self.frame.symbols[self.plan.training_frames:]


def qpsk_mod(bits) -> np.ndarray:
    bits = check_bits(bits)
    if bits.size % 2:
        raise ConfigError(f"QPSK needs an even number of bits, got {bits.size}")
    pairs = bits.reshape(-1, 2).astype(np.float64)
    return ((1 - 2 * pairs[:, 1]) + 1j * (1 - 2 * pairs[:, 0])) * SQRT_HALF


def qpsk_demod(symbols) -> np.ndarray:
    """Hard-decision nearest-point slicer, inverse of :func:`qpsk_mod`."""
    s = np.asarray(symbols, dtype=np.complex128).ravel()
    out = np.empty((s.size, 2), dtype=np.uint8)
    out[:, 0] = s.imag < 0
    out[:, 1] = s.real < 0
    return out.ravel()


def qpsk_slice(symbols) -> np.ndarray:
    s = np.asarray(symbols, dtype=np.complex128)
    return (np.where(s.real < 0, -1.0, 1.0) + 1j * np.where(s.imag < 0, -1.0, 1.0)) * SQRT_HALF


def normalize_per_subcarrier(frame: SymbolFrame) -> SymbolFrame:
    """Rescale every occupied subcarrier to unit average power over the burst."""
    sym = frame.symbols
    power = np.mean(np.abs(sym) ** 2, axis=0)
    gain = np.ones_like(power)
    nz = power > 0
    gain[nz] = 1 / np.sqrt(power[nz])
    return SymbolFrame(frame.indices, sym * gain)


def training_bits(cfg: OfdmConfig, plan: FramePlan) -> np.ndarray:
    rng = np.random.default_rng(plan.training_seed)
    return rng.integers(0, 2, 2 * cfg.n_data_subcarriers * plan.training_frames, dtype=np.uint8)


def _symbol_frame(bits, cfg: OfdmConfig, plan: FramePlan) -> SymbolFrame:
    bits = check_bits(bits)
    if bits.size != plan.payload_bits(cfg):
        raise ConfigError(f"expected {plan.payload_bits(cfg)} payload bits, got {bits.size}")
    all_bits = np.concatenate([training_bits(cfg, plan), bits])
    sym = qpsk_mod(all_bits).reshape(plan.n_frames, cfg.n_data_subcarriers)
    return normalize_per_subcarrier(SymbolFrame(cfg.data_subcarriers, sym))


def build_dco_burst(bits, cfg: OfdmConfig, plan: FramePlan, params: TxParams = TxParams()) -> TxBurst:
    """Bipolar DCO drive: clip at +-clip_sigma sample sigmas, map that range to +-0.5 V."""
    if cfg.format is not Format.DCO:
        raise ConfigError("build_dco_burst needs a DCO config")
    frame = _symbol_frame(bits, cfg, plan)
    x = idft_real(hermitian_map(frame, cfg.fft_size))
    sigma = float(np.std(x))
    if sigma == 0:
        scale = 1.0
    else:
        level = params.clip_sigma * sigma
        x = np.clip(x, -level, level)
        scale = 0.5 / level
    wave = frames_to_waveform(scale * x, cfg.cp_len)
    return TxBurst(
        RealWaveform(wave, cfg.sample_rate, Unit.VOLTS, {"format": "dco", "scale": scale}),
        scale, frame, x, cfg, plan,
    )


def laco_layer_waveforms(frame: SymbolFrame, cfg: OfdmConfig, order=None) -> np.ndarray:
    """Clipped time-domain waveform of each layer, shape ``(n_layers, n_frames, N)``."""
    col = {int(k): i for i, k in enumerate(frame.indices)}
    layers = cfg.layers if order is None else [cfg.layers[i] for i in order]
    out = []
    for layer in layers:
        cols = [col[k] for k in layer.subcarriers]
        sub = SymbolFrame(layer.subcarriers, frame.symbols[:, cols])
        out.append(clip_negative(idft_real(hermitian_map(sub, cfg.fft_size))))
    return np.stack(out)


def build_laco_burst(bits, cfg: OfdmConfig, plan: FramePlan, params: TxParams = TxParams(),
                     dco_scale: Optional[float] = None) -> TxBurst:
    """Non-negative layered ACO drive, scaled by the reference DCO build's factor."""
    if cfg.format is not Format.LACO:
        raise ConfigError("build_laco_burst needs a LACO config")
    if dco_scale is None:
        dco_scale = reference_dco_scale(cfg, plan, params)
    if not dco_scale > 0:
        raise ConfigError("dco_scale must be positive")
    frame = _symbol_frame(bits, cfg, plan)
    x = laco_layer_waveforms(frame, cfg).sum(axis=0)
    wave = frames_to_waveform(dco_scale * x, cfg.cp_len)
    return TxBurst(
        RealWaveform(wave, cfg.sample_rate, Unit.VOLTS, {"format": "laco", "scale": dco_scale}),
        float(dco_scale), frame, x, cfg, plan,
    )


def reference_dco_config(cfg: OfdmConfig, dco_band=63) -> OfdmConfig:
    return OfdmConfig.dco(cfg.fft_size, dco_band, cfg.cp_len, cfg.sample_rate)


def reference_dco_scale(cfg: OfdmConfig, plan: FramePlan, params: TxParams = TxParams(),
                        dco_band=63, seed=0) -> float:
    """Scale factor of a DCO burst with the same FFT size and per-subcarrier power."""
    ref = reference_dco_config(cfg, dco_band)
    bits = np.random.default_rng(seed).integers(0, 2, plan.payload_bits(ref), dtype=np.uint8)
    return build_dco_burst(bits, ref, plan, params).scale


def build_burst(bits, cfg: OfdmConfig, plan: FramePlan, params: TxParams = TxParams(),
                dco_scale: Optional[float] = None) -> TxBurst:
    if cfg.format is Format.DCO:
        return build_dco_burst(bits, cfg, plan, params)
    return build_laco_burst(bits, cfg, plan, params, dco_scale)


def spectral_efficiency_ratio(laco: OfdmConfig, dco: OfdmConfig) -> Fraction:
    """LACO data subcarriers over the DCO band slots (data bins plus the DC bin).

    With 63 DCO data bins and the 32/16/8 layer plan this is 56/64.
    """
    return Fraction(laco.n_data_subcarriers, dco.data_band + 1)
