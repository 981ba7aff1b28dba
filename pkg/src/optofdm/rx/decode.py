"""Symbol recovery for DCO and layered ACO-OFDM.

Layered decoding works on one-tap-equalized spectra, so every quantity is
expressed in units of the unscaled transmitter IDFT waveform.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..core import Format, OfdmConfig, SymbolFrame, clip_negative, dft, idft_real, waveform_to_frames
from ..exceptions import ConfigError, DecodeError
from ..tx import qpsk_demod, qpsk_slice
from .onetap import OneTapBank, one_tap_apply

RESIDUAL_GROWTH_LIMIT = 10.0


def pairwise_cancel(residual, l: int, N: int) -> np.ndarray:
    """Zero the smaller sample of every opposite-polarity pair of layer ``l``.

    Pairs are ``(k, k + N/2**l)`` for ``k mod (N/2**l * 2) < N/2**l``, taken
    independently inside each OFDM symbol.
    """
    r = np.asarray(residual, dtype=np.float64)
    if r.size % N:
        raise ConfigError(f"residual length {r.size} is not a multiple of N={N}")
    P = N >> l
    if P < 1:
        raise ConfigError(f"layer {l} has no antiperiod inside N={N}")
    blocks = r.reshape(-1, N // (2 * P), 2, P)
    first, second = blocks[:, :, 0, :], blocks[:, :, 1, :]
    keep_first = first >= second
    out = np.empty_like(blocks)
    out[:, :, 0, :] = np.where(keep_first, first, 0.0)
    out[:, :, 1, :] = np.where(keep_first, 0.0, second)
    return out.reshape(r.shape)


def _bandlimit(spectra, bins):
    # mirror bins are rebuilt from the positive ones so the result is exactly Hermitian
    N = spectra.shape[-1]
    out = np.zeros_like(spectra)
    out[:, bins] = spectra[:, bins]
    out[:, N - bins] = np.conj(spectra[:, bins])
    return out


def _regenerate(decisions, layer_bins, N):
    spec = np.zeros((decisions.shape[0], N), dtype=np.complex128)
    spec[:, layer_bins] = decisions
    spec[:, N - layer_bins] = np.conj(decisions)
    return clip_negative(idft_real(spec))


def equalized_spectra(y, cfg: OfdmConfig, bank: OneTapBank) -> np.ndarray:
    frames = waveform_to_frames(getattr(y, "samples", y), cfg.fft_size, cfg.cp_len)
    return one_tap_apply(dft(frames), bank)


@dataclass
class LacoDecodeResult:
    bits: np.ndarray
    symbols: SymbolFrame                      # pre-decision, data_subcarriers order
    layer_symbols: dict                       # layer index -> (n_frames, n_bins)
    residuals: list = field(default_factory=list)  # band spectra after each layer


def laco_decode(y, cfg: OfdmConfig, bank: OneTapBank, enable_pairwise=True,
                order: Optional[Sequence[int]] = None) -> LacoDecodeResult:
    """Iterative layered decoding with clipping-noise regeneration.

    Pass one decodes layers in ``order`` (default 1, 2, ...), each time
    regenerating the decided layer, clipping it, and subtracting it. When
    pairwise cancellation is enabled for a layer, a second pass rebuilds that
    layer's received waveform from the regenerated layer plus the band-limited
    error left by all decisions, applies :func:`pairwise_cancel`, and decides
    again.
    """
    if cfg.format is not Format.LACO:
        raise ConfigError("laco_decode needs a LACO config")
    N = cfg.fft_size
    layers = {layer.layer_index: layer for layer in cfg.layers}
    order = list(order) if order is not None else sorted(layers)
    if sorted(order) != sorted(layers):
        raise ConfigError(f"decode order {order} does not cover layers {sorted(layers)}")
    if isinstance(enable_pairwise, (bool, np.bool_)):
        pairwise = {l: bool(enable_pairwise) for l in layers}
    else:
        pairwise = {l: bool(p) for l, p in zip(sorted(layers), enable_pairwise)}

    Z = y if np.iscomplexobj(y) and np.ndim(y) == 2 else equalized_spectra(y, cfg, bank)
    band = bank.bins
    residual = _bandlimit(Z, band)
    residuals = [residual.copy()]
    soft, regen = {}, {}
    prev_power = np.mean(np.abs(residual[:, band]) ** 2)
    for l in order:
        idx = np.asarray(layers[l].subcarriers, dtype=int)
        soft[l] = 2 * residual[:, idx]
        regen[l] = _regenerate(qpsk_slice(soft[l]), idx, N)
        residual = residual - _bandlimit(np.fft.fft(regen[l], axis=-1), band)
        power = np.mean(np.abs(residual[:, band]) ** 2)
        if power > RESIDUAL_GROWTH_LIMIT * max(prev_power, 1e-300):
            raise DecodeError(f"residual power grew {power / prev_power:.1f}x after layer {l}")
        prev_power = power
        residuals.append(residual.copy())

    for l in order:
        if not pairwise[l]:
            continue
        idx = np.asarray(layers[l].subcarriers, dtype=int)
        total = sum(np.fft.fft(c, axis=-1) for c in regen.values())
        error = idft_real(_bandlimit(Z - total, band))
        cleaned = pairwise_cancel(regen[l] + error, l, N)
        soft[l] = 2 * np.fft.fft(cleaned, axis=-1)[:, idx]
        regen[l] = _regenerate(qpsk_slice(soft[l]), idx, N)

    ordered = sorted(layers)
    sym = np.concatenate([soft[l] for l in ordered], axis=1)
    return LacoDecodeResult(
        bits=qpsk_demod(sym),
        symbols=SymbolFrame(cfg.data_subcarriers, sym),
        layer_symbols=soft,
        residuals=residuals,
    )


def dco_decode(y, cfg: OfdmConfig, bank: OneTapBank):
    """DFT framing, one-tap equalization on bins 1..B, hard QPSK slicing."""
    if cfg.format is not Format.DCO:
        raise ConfigError("dco_decode needs a DCO config")
    Z = y if np.iscomplexobj(y) and np.ndim(y) == 2 else equalized_spectra(y, cfg, bank)
    sym = Z[:, cfg.data_subcarriers]
    return qpsk_demod(sym), SymbolFrame(cfg.data_subcarriers, sym)
