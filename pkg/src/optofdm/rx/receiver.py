"""Receiver DSP chain as a single estimator: train on the known frames, decode the rest."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..core import Format, SymbolFrame, dft, hermitian_map, waveform_to_frames
from ..exceptions import ConfigError
from ..tx import TxBurst
from ..validation import check_waveform
from .decode import dco_decode, laco_decode
from .onetap import one_tap_estimate
from .volterra import VolterraEqualizer


class OfdmReceiver(BaseEstimator):
    """Volterra (optional) + one-tap equalization + DCO or layered ACO decoding.

    ``fit(y, burst)`` uses the training frames at the head of ``burst``;
    ``y`` must already be synchronized to the first frame. With ``inband``
    the Volterra stage is trained on the error inside the data band, which is
    all the DFT decoder looks at.
    """

    def __init__(self, equalizer="volterra+one_tap", pairwise=True, memory=10,
                 mu1=1e-3, mu2=1e-4, n_epochs=20, delay=5, inband=True):
        self.equalizer = equalizer
        self.pairwise = pairwise
        self.memory = memory
        self.mu1 = mu1
        self.mu2 = mu2
        self.n_epochs = n_epochs
        self.delay = delay
        self.inband = inband

    def _reference_spectra(self, burst: TxBurst):
        cfg, n_train = burst.cfg, burst.plan.training_frames
        if cfg.format is Format.DCO:
            return hermitian_map(SymbolFrame(burst.frame.indices, burst.training_symbols),
                                 cfg.fft_size)
        return np.fft.fft(burst.unscaled[:n_train], axis=-1)

    def fit(self, y, burst: TxBurst):
        cfg, plan = burst.cfg, burst.plan
        if plan.training_frames < 1:
            raise ConfigError("receiver training needs at least one training frame")
        y = check_waveform(y, name="y")
        n_train = plan.training_frames * cfg.symbol_len
        self.cfg_ = cfg
        if self.equalizer == "volterra+one_tap":
            self.volterra_ = VolterraEqualizer(
                self.memory, self.mu1, self.mu2, self.n_epochs, self.delay,
                fft_size=cfg.fft_size if self.inband else None,
                band=cfg.data_band if self.inband else None, cp_len=cfg.cp_len,
            ).fit(y[:n_train], burst.waveform.samples[:n_train])
            y = self.volterra_.predict(y)
        elif self.equalizer == "one_tap":
            self.volterra_ = None
        else:
            raise ConfigError(f"unknown equalizer {self.equalizer!r}")
        rx_frames = waveform_to_frames(y[:n_train], cfg.fft_size, cfg.cp_len)
        bins = np.arange(1, cfg.data_band + 1)
        self.bank_ = one_tap_estimate(dft(rx_frames), self._reference_spectra(burst), bins)
        self.n_train_frames_ = plan.training_frames
        return self

    def equalize_time(self, y):
        check_is_fitted(self, "bank_")
        y = check_waveform(y, name="y")
        return self.volterra_.predict(y) if self.volterra_ is not None else y

    def decode(self, y):
        """Return ``(payload_bits, payload_symbol_frame)``."""
        check_is_fitted(self, "bank_")
        cfg = self.cfg_
        y = self.equalize_time(y)
        payload = y[self.n_train_frames_ * cfg.symbol_len:]
        if cfg.format is Format.DCO:
            return dco_decode(payload, cfg, self.bank_)
        res = laco_decode(payload, cfg, self.bank_, enable_pairwise=self.pairwise)
        return res.bits, res.symbols

    def predict(self, y):
        return self.decode(y)[0]
