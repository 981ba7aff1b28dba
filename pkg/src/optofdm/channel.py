"""Behavioural IM/DD link: directly modulated laser, SMF, attenuator, photodiode.

The laser is a first-order low-pass on the drive current, a threshold-clipped
L-I curve with quadratic compression, and transient/adiabatic chirp. It is a
stand-in for a real DFB, not a rate-equation model.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import RealWaveform, Unit
from .exceptions import ConfigError
from .validation import check_complex, check_waveform

C_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class DmlParams:
    i_threshold: float = 12.4      # mA
    slope_eff: float = 0.05e-3     # W/mA
    bias: float = 21.082           # mA
    bandwidth_3db: float = 8e9     # Hz, 0 disables the low-pass
    compression: float = 0.005     # 1/mA
    alpha_chirp: float = 3.0
    kappa_adiabatic: float = 0.0   # Hz/W

    def __post_init__(self):
        if not self.i_threshold > 0:
            raise ConfigError("i_threshold must be positive")
        if not self.slope_eff > 0:
            raise ConfigError("slope_eff must be positive")
        if not self.bias >= 0:
            raise ConfigError("bias must be non-negative")
        if self.bandwidth_3db < 0 or self.compression < 0:
            raise ConfigError("bandwidth_3db and compression must be non-negative")

    @classmethod
    def ideal(cls, **kw):
        """Linear laser: no low-pass, no compression, no chirp."""
        kw = {"bandwidth_3db": 0.0, "compression": 0.0, "alpha_chirp": 0.0,
              "kappa_adiabatic": 0.0, **kw}
        return cls(**kw)


@dataclass(frozen=True)
class FiberParams:
    length: float = 0.0            # km
    dispersion: float = 17.0       # ps/(nm km)
    wavelength: float = 1550.0     # nm
    loss: float = 0.2              # dB/km

    def __post_init__(self):
        if not self.length >= 0:
            raise ConfigError("fiber length must be non-negative")

    @property
    def beta2(self):
        """Group-velocity dispersion in s^2/m."""
        lam = self.wavelength * 1e-9
        return -(self.dispersion * 1e-6) * lam**2 / (2 * np.pi * C_LIGHT)

    def notch_frequency(self):
        """First small-signal IM/DD power-fading notch (chirp-free), Hz."""
        lam = self.wavelength * 1e-9
        return np.sqrt(C_LIGHT / (2 * self.dispersion * 1e-6 * self.length * 1e3 * lam**2))


@dataclass(frozen=True)
class RxFrontendParams:
    rop_dbm: float = 0.0
    responsivity: float = 0.8      # A/W
    thermal_noise_rms: float = 50e-6   # A
    adc_bits: int = 0
    seed: int = 0

    def __post_init__(self):
        if not self.responsivity > 0:
            raise ConfigError("responsivity must be positive")
        if not self.thermal_noise_rms >= 0:
            raise ConfigError("thermal_noise_rms must be non-negative")
        if self.adc_bits < 0:
            raise ConfigError("adc_bits must be non-negative")


@dataclass
class OpticalField:
    samples: np.ndarray            # complex envelope, sqrt(W)
    sample_rate: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = check_complex(self.samples, name="optical field")

    @property
    def power(self):
        return np.abs(self.samples) ** 2

    @property
    def average_power(self):
        return float(np.mean(self.power))


def _angular_freq(n, fs):
    return 2 * np.pi * np.fft.fftfreq(n, d=1 / fs)


def lowpass_first_order(x, fs, f3db):
    """Single-pole response ``1/(1 + j f/f3db)`` applied in the frequency domain."""
    if f3db <= 0:
        return np.asarray(x, dtype=np.float64)
    f = np.fft.rfftfreq(len(x), d=1 / fs)
    return np.fft.irfft(np.fft.rfft(x) / (1 + 1j * f / f3db), n=len(x))


def li_curve(current_ma, p: DmlParams):
    """Static L-I characteristic: optical power in W for a drive current in mA."""
    excess = np.maximum(np.asarray(current_ma, dtype=np.float64) - p.i_threshold, 0.0)
    return np.maximum(p.slope_eff * excess * (1 - p.compression * excess), 0.0)


def chirp_phase(power, fs, alpha, kappa):
    """Integrate ``dphi/dt = alpha/2 dlnP/dt + 2 pi kappa P``; zero rate where P = 0."""
    power = np.asarray(power, dtype=np.float64)
    dphi = np.zeros_like(power)
    if alpha:
        on = power > 0
        both = on[1:] & on[:-1]
        logp = np.log(np.where(on, power, 1.0))
        dphi[1:] = np.where(both, 0.5 * alpha * np.diff(logp), 0.0)
    if kappa:
        dphi += 2 * np.pi * kappa * power / fs
    return np.cumsum(dphi)


def dml_modulate(drive, p: DmlParams, sample_rate=None) -> OpticalField:
    """Drive current (mA, bipolar, around zero) to the laser's optical field."""
    fs = sample_rate or getattr(drive, "sample_rate", None)
    if not fs:
        raise ConfigError("dml_modulate needs a sample rate")
    i_drive = check_waveform(drive, name="drive")
    current = p.bias + lowpass_first_order(i_drive, fs, p.bandwidth_3db)
    power = li_curve(current, p)
    phase = chirp_phase(power, fs, p.alpha_chirp, p.kappa_adiabatic)
    return OpticalField(np.sqrt(power) * np.exp(1j * phase), fs, {"current_ma": current})


def fiber_propagate(field: OpticalField, f: FiberParams) -> OpticalField:
    if f.length == 0:
        return OpticalField(field.samples.copy(), field.sample_rate)
    L = f.length * 1e3
    w = _angular_freq(field.samples.size, field.sample_rate)
    H = np.exp(0.5j * f.beta2 * w**2 * L) * 10 ** (-f.loss * f.length / 20)
    return OpticalField(np.fft.ifft(np.fft.fft(field.samples) * H), field.sample_rate)


def dbm_to_watts(dbm):
    return 10 ** ((dbm - 30) / 10)


def attenuate_to_rop(field: OpticalField, rop_dbm: float) -> OpticalField:
    p = field.average_power
    if not p > 0:
        raise ConfigError("cannot attenuate a zero-power field to a target ROP")
    gain = np.sqrt(dbm_to_watts(rop_dbm) / p)
    return OpticalField(field.samples * gain, field.sample_rate)


def quantize(x, bits):
    """Uniform mid-rise quantizer spanning the observed range of ``x``."""
    lo, hi = float(np.min(x)), float(np.max(x))
    if bits <= 0 or hi == lo:
        return x
    levels = 2**bits
    step = (hi - lo) / levels
    idx = np.clip(np.floor((x - lo) / step), 0, levels - 1)
    return lo + (idx + 0.5) * step


def photodetect(field: OpticalField, p: RxFrontendParams) -> RealWaveform:
    """Square-law detection plus white thermal noise; output in mA."""
    current = p.responsivity * field.power
    if p.thermal_noise_rms > 0:
        rng = np.random.default_rng(p.seed)
        current = current + rng.normal(0.0, p.thermal_noise_rms, current.size)
    current_ma = current * 1e3
    if p.adc_bits:
        current_ma = quantize(current_ma, p.adc_bits)
    return RealWaveform(current_ma, field.sample_rate, Unit.MILLIAMPS)
