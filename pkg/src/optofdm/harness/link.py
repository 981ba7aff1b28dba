"""End-to-end link: tx -> laser -> fiber -> attenuator -> photodiode -> rx -> metrics."""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..channel import attenuate_to_rop, dml_modulate, fiber_propagate, photodetect
from ..core import Format, RealWaveform, Unit
from ..exceptions import OptOfdmError, StageError, SyncError
from ..metrics import MetricsRecord, link_metrics
from ..rx import OfdmReceiver, synchronize
from ..tx import build_burst, reference_dco_scale
from .config import ExperimentConfig

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Per-run seed: ``seed XOR splitmix64(index)``, masked to 64 bits."""
    return (int(seed) ^ splitmix64(int(index))) & _MASK64


# stream indices below derive_seed(point_seed, .)
_PAYLOAD, _NOISE, _REF = 0, 1, 2


@dataclass
class LinkResult:
    metrics: MetricsRecord
    format: str
    bias_ma: float
    rop_dbm: float
    equalizer: str
    seed: int
    sync_offset: int
    tx_bits: np.ndarray
    rx_bits: np.ndarray
    equalizer_report: Optional[object] = None


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except StageError:
        raise
    except (OptOfdmError, ValueError, FloatingPointError) as exc:
        raise StageError(name, exc) from exc


def transmit(cfg: ExperimentConfig, fmt=None, seed=None):
    """Build the drive burst for ``fmt`` with payload bits drawn from ``seed``."""
    fmt = Format(fmt or cfg.format)
    seed = cfg.seed if seed is None else seed
    ofdm = cfg.ofdm_config(fmt)
    plan = cfg.plan.build(ofdm)
    rng = np.random.default_rng(derive_seed(seed, _PAYLOAD))
    bits = rng.integers(0, 2, plan.payload_bits(ofdm), dtype=np.uint8)
    dco_scale = None
    if fmt is Format.LACO:
        dco_scale = reference_dco_scale(ofdm, plan, cfg.tx, cfg.ofdm.dco_band,
                                        seed=derive_seed(seed, _REF))
    return bits, build_burst(bits, ofdm, plan, cfg.tx, dco_scale)


def run_link_detailed(cfg: ExperimentConfig, fmt=None, bias_ma=None, rop_dbm=None,
                      equalizer=None, seed=None) -> LinkResult:
    fmt = Format(fmt or cfg.format)
    bias = cfg.bias_for(fmt) if bias_ma is None else float(bias_ma)
    rop = cfg.rxfe.rop_dbm if rop_dbm is None else float(rop_dbm)
    equalizer = equalizer or cfg.rx.equalizer
    seed = cfg.seed if seed is None else int(seed)

    bits, burst = _stage("tx", transmit, cfg, fmt, seed)
    ofdm, plan = burst.cfg, burst.plan
    guard = np.zeros(cfg.plan.guard_samples)
    drive_ma = np.concatenate([guard, burst.waveform.samples * cfg.tx.drive_pp, guard])
    drive = RealWaveform(drive_ma, ofdm.sample_rate, Unit.MILLIAMPS)

    field = _stage("dml", dml_modulate, drive, replace(cfg.dml, bias=bias))
    field = _stage("fiber", fiber_propagate, field, cfg.fiber)
    field = _stage("attenuator", attenuate_to_rop, field, rop)
    rxfe = replace(cfg.rxfe, rop_dbm=rop, seed=derive_seed(seed, _NOISE + cfg.rxfe.seed))
    detected = _stage("photodetector", photodetect, field, rxfe)

    n_train = plan.training_frames * ofdm.symbol_len
    n_total = plan.n_frames * ofdm.symbol_len
    offset = _stage("sync", synchronize, detected.samples, burst.waveform.samples[:n_train])
    if offset + n_total > detected.samples.size:
        raise StageError("sync", SyncError(f"offset {offset} leaves too few samples"))
    y = detected.samples[offset: offset + n_total]

    pairwise = cfg.rx.pairwise if equalizer == "volterra+one_tap" else cfg.rx.pairwise_one_tap
    receiver = OfdmReceiver(equalizer, pairwise, cfg.rx.memory, cfg.rx.mu1, cfg.rx.mu2,
                            cfg.rx.epochs, cfg.rx.delay, cfg.rx.inband_training)
    _stage("equalizer", receiver.fit, y, burst)
    rx_bits, rx_frame = _stage("decode", receiver.decode, y)
    metrics = _stage("metrics", link_metrics, rx_frame.symbols, burst.payload_symbols,
                     rx_bits, bits, burst.waveform.samples)
    report = receiver.volterra_.report_ if receiver.volterra_ is not None else None
    return LinkResult(metrics, fmt.value, bias, rop, equalizer, seed, int(offset), bits, rx_bits,
                      report)


def run_link(cfg: ExperimentConfig, **kw) -> MetricsRecord:
    """Full pipeline for one operating point; deterministic in ``cfg.seed``."""
    return run_link_detailed(cfg, **kw).metrics
