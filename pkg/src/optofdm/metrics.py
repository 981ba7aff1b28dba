"""Signal-quality metrics: EVM, BER, two Q-factor conventions, PAPR, spectra."""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import welch
from scipy.special import erfcinv

from .validation import check_waveform

MIN_ERRORS_FOR_BER_Q = 100


@dataclass
class MetricsRecord:
    evm_rms: float
    ber: float
    q_evm_db: float
    q_ber_db: float
    papr_db: float
    per_subcarrier_snr_db: np.ndarray
    bits_counted: int
    bit_errors: int = 0
    q_ber_is_bound: bool = False   # zero errors: q_ber_db is a lower bound
    ber_clamped: bool = False
    extra: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, MetricsRecord):
            return NotImplemented
        a, b = self.as_dict(), other.as_dict()
        return all(np.array_equal(a[k], b[k], equal_nan=True) for k in a)

    def as_dict(self):
        return {
            "evm_rms": self.evm_rms, "ber": self.ber, "q_evm_db": self.q_evm_db,
            "q_ber_db": self.q_ber_db, "papr_db": self.papr_db,
            "per_subcarrier_snr_db": np.asarray(self.per_subcarrier_snr_db),
            "bits_counted": self.bits_counted, "bit_errors": self.bit_errors,
            "q_ber_is_bound": self.q_ber_is_bound, "ber_clamped": self.ber_clamped,
        }

    @property
    def q_ber_reliable(self):
        return self.bit_errors >= MIN_ERRORS_FOR_BER_Q


def evm(rx_syms, ref_syms) -> float:
    rx = np.asarray(rx_syms, dtype=np.complex128).ravel()
    ref = np.asarray(ref_syms, dtype=np.complex128).ravel()
    if rx.size == 0:
        raise ValueError("evm of an empty symbol set")
    if rx.size != ref.size:
        raise ValueError("rx and reference must have equal lengths")
    return float(np.sqrt(np.mean(np.abs(rx - ref) ** 2) / np.mean(np.abs(ref) ** 2)))


def q_from_evm(evm_rms) -> float:
    if not evm_rms > 0:
        raise ValueError(f"EVM must be positive, got {evm_rms}")
    return -20 * math.log10(evm_rms)


def q_from_ber(ber) -> float:
    """``20 log10(sqrt(2) erfcinv(2 ber))``; BER 0.5 maps to -inf with a warning."""
    if not 0 < ber <= 0.5:
        raise ValueError(f"BER must lie in (0, 0.5], got {ber}")
    q_lin = math.sqrt(2) * float(erfcinv(2 * ber))
    if q_lin <= 0:
        warnings.warn("BER of 0.5 carries no information; Q clamped to -inf dB",
                      RuntimeWarning, stacklevel=2)
        return -math.inf
    return 20 * math.log10(q_lin)


def papr(w) -> float:
    x = check_waveform(w, name="waveform")
    p = x * x
    return 10 * math.log10(p.max() / p.mean())


def ber_count(rx_bits, tx_bits):
    """Raw bit error ratio and number of bits compared (no clamping)."""
    rx = np.asarray(rx_bits).ravel()
    tx = np.asarray(tx_bits).ravel()
    if rx.size != tx.size:
        raise ValueError("bit streams differ in length")
    if tx.size == 0:
        raise ValueError("no bits to count")
    errors = int(np.count_nonzero(rx != tx))
    return errors / tx.size, tx.size


def per_subcarrier_snr_db(rx_syms, ref_syms) -> np.ndarray:
    rx = np.atleast_2d(rx_syms)
    ref = np.atleast_2d(ref_syms)
    noise = np.mean(np.abs(rx - ref) ** 2, axis=0)
    sig = np.mean(np.abs(ref) ** 2, axis=0)
    with np.errstate(divide="ignore"):
        return 10 * np.log10(sig / noise)


def power_spectrum(w, sample_rate, nperseg=1024):
    """One-sided Welch power spectral density in dB/Hz."""
    x = check_waveform(w, name="waveform")
    f, p = welch(x, fs=sample_rate, nperseg=min(nperseg, x.size), return_onesided=True)
    with np.errstate(divide="ignore"):
        return f, 10 * np.log10(p)


def link_metrics(rx_syms, ref_syms, rx_bits, tx_bits, tx_waveform) -> MetricsRecord:
    e = evm(rx_syms, ref_syms)
    raw_ber, n = ber_count(rx_bits, tx_bits)
    errors = int(round(raw_ber * n))
    clamped = raw_ber > 0.5
    ber = min(raw_ber, 0.5)
    bound = errors == 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        q_ber = q_from_ber(1 / n if bound else ber)
    return MetricsRecord(
        evm_rms=e,
        ber=ber,
        q_evm_db=q_from_evm(e) if e > 0 else math.inf,
        q_ber_db=q_ber,
        papr_db=papr(tx_waveform),
        per_subcarrier_snr_db=per_subcarrier_snr_db(rx_syms, ref_syms),
        bits_counted=n,
        bit_errors=errors,
        q_ber_is_bound=bound,
        ber_clamped=clamped,
    )
