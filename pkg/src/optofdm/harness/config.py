"""Experiment configuration and its flat ``section.key = value`` text format."""

import dataclasses
from dataclasses import dataclass, field, replace
from typing import Optional

from ..channel import DmlParams, FiberParams, RxFrontendParams
from ..core import Format, OfdmConfig
from ..exceptions import ConfigError
from ..tx import FramePlan, TxParams

EQUALIZERS = ("one_tap", "volterra+one_tap")

# Thermal noise that puts DCO one-tap Q near 16 dB at 0 dBm with the default
# laser and bias (see tests/test_calibration.py).
CALIBRATED_THERMAL_NOISE_A = 4.9e-5


@dataclass(frozen=True)
class OfdmSection:
    fft_size: int = 256
    dco_band: int = 63
    laco_band: int = 64
    n_layers: int = 3
    cp_len: int = 0
    dco_sample_rate: float = 8.75e9
    laco_sample_rate: float = 10e9

    def build(self, fmt) -> OfdmConfig:
        if Format(fmt) is Format.DCO:
            return OfdmConfig.dco(self.fft_size, self.dco_band, self.cp_len, self.dco_sample_rate)
        return OfdmConfig.laco(self.fft_size, self.laco_band, self.n_layers, self.cp_len,
                               self.laco_sample_rate)


@dataclass(frozen=True)
class PlanSection:
    min_bits: int = 100_000
    training_frames: int = 32
    training_seed: int = 20170101
    guard_samples: int = 64

    def build(self, ofdm: OfdmConfig) -> FramePlan:
        return FramePlan.for_min_bits(ofdm, self.min_bits, self.training_frames,
                                      training_seed=self.training_seed)


@dataclass(frozen=True)
class BiasSection:
    dco_ma: float = 21.082
    laco_ma: float = 20.891


@dataclass(frozen=True)
class RxSection:
    equalizer: str = "volterra+one_tap"
    pairwise: bool = True            # noise cancellation with the Volterra equalizer
    pairwise_one_tap: bool = False   # ... and with plain one-tap equalization
    inband_training: bool = True
    memory: int = 10
    mu1: float = 1e-3
    mu2: float = 1e-4
    epochs: int = 20
    delay: int = 5

    def __post_init__(self):
        if self.equalizer not in EQUALIZERS:
            raise ConfigError(f"rx.equalizer must be one of {EQUALIZERS}, got {self.equalizer!r}")


@dataclass(frozen=True)
class SweepSection:
    rop_list_dbm: tuple = (0.0, -2.0, -4.0, -6.0, -8.0, -10.0, -12.0, -14.0)
    bias_list_ma: tuple = ()
    bias_opt: bool = False
    formats: tuple = ("dco", "laco")
    equalizers: tuple = ("one_tap", "volterra+one_tap")
    bias_span_ma: float = 20.0
    bias_tol_ma: float = 0.05
    n_jobs: int = 1

    def __post_init__(self):
        if not self.rop_list_dbm:
            raise ConfigError("sweep.rop_list_dbm must not be empty")
        if not self.formats or not self.equalizers:
            raise ConfigError("sweep.formats and sweep.equalizers must not be empty")
        for f in self.formats:
            Format(f)
        for e in self.equalizers:
            if e not in EQUALIZERS:
                raise ConfigError(f"unknown equalizer {e!r}")


def _default_rxfe():
    return RxFrontendParams(thermal_noise_rms=CALIBRATED_THERMAL_NOISE_A)


@dataclass(frozen=True)
class ExperimentConfig:
    format: str = "dco"
    seed: int = 1
    output_path: str = ""
    ofdm: OfdmSection = field(default_factory=OfdmSection)
    tx: TxParams = field(default_factory=TxParams)
    plan: PlanSection = field(default_factory=PlanSection)
    dml: DmlParams = field(default_factory=DmlParams)
    bias: BiasSection = field(default_factory=BiasSection)
    fiber: FiberParams = field(default_factory=FiberParams)
    rxfe: RxFrontendParams = field(default_factory=_default_rxfe)
    rx: RxSection = field(default_factory=RxSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    def __post_init__(self):
        try:
            Format(self.format)
        except ValueError:
            raise ConfigError(f"format must be 'dco' or 'laco', got {self.format!r}") from None
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    def ofdm_config(self, fmt=None) -> OfdmConfig:
        return self.ofdm.build(fmt or self.format)

    def bias_for(self, fmt=None) -> float:
        return self.bias.dco_ma if Format(fmt or self.format) is Format.DCO else self.bias.laco_ma

    def with_overrides(self, overrides) -> "ExperimentConfig":
        """Return a copy with ``{"section.key": value}`` entries replaced."""
        flat = to_flat(self)
        for key, value in dict(overrides).items():
            if key not in flat:
                raise ConfigError(f"unknown config key {key!r}")
            flat[key] = value if not isinstance(value, str) else _parse_value(key, value)
        return from_flat(flat)

    def to_text(self) -> str:
        return "".join(f"{k} = {_format_value(v)}\n" for k, v in to_flat(self).items())


# dml.bias is driven by the per-format bias section, not set directly
_HIDDEN = {"dml.bias"}


def to_flat(cfg: ExperimentConfig) -> dict:
    flat = {}
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if dataclasses.is_dataclass(value):
            for sub in dataclasses.fields(value):
                key = f"{f.name}.{sub.name}"
                if key not in _HIDDEN:
                    flat[key] = getattr(value, sub.name)
        else:
            flat[f.name] = value
    return flat


def _defaults():
    return to_flat(ExperimentConfig())


def from_flat(flat: dict) -> ExperimentConfig:
    defaults = ExperimentConfig()
    unknown = set(flat) - set(_defaults())
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    top, nested = {}, {}
    for key, value in flat.items():
        if "." in key:
            sec, name = key.split(".", 1)
            nested.setdefault(sec, {})[name] = value
        else:
            top[key] = value
    try:
        kwargs = dict(top)
        for sec, values in nested.items():
            kwargs[sec] = replace(getattr(defaults, sec), **values)
        return replace(defaults, **kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_format_value(x) for x in v)
    return str(v)


def _parse_value(key, text):
    default = _defaults()[key]
    text = text.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(f"not a boolean: {text!r}")
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(text, 0)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            items = [t.strip() for t in text.split(",") if t.strip()]
            sample = default[0] if default else None
            if key.endswith(("_dbm", "_ma")) or isinstance(sample, float):
                return tuple(float(t) for t in items)
            return tuple(items)
        return text
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from None


CSV_PREFIX = "# config:"


def parse_config_text(text: str, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped.

    A sweep CSV is accepted as well: only its ``# config: key = value`` header
    lines are read, so a CSV can be fed back as its own config.
    """
    lines = text.splitlines()
    if any(line.startswith(CSV_PREFIX) for line in lines):
        lines = [line[len(CSV_PREFIX):] for line in lines if line.startswith(CSV_PREFIX)]
    flat = to_flat(base or ExperimentConfig())
    seen = set()
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in flat:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        flat[key] = _parse_value(key, value)
    return from_flat(flat)


def load_config(path, overrides=()) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = parse_config_text(text)
    return apply_overrides(cfg, overrides)


def apply_overrides(cfg: ExperimentConfig, overrides) -> ExperimentConfig:
    """Apply ``key=value`` strings (CLI ``--override``)."""
    parsed = {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = (s.strip() for s in item.split("=", 1))
        parsed[key] = value
    return cfg.with_overrides(parsed) if parsed else cfg
