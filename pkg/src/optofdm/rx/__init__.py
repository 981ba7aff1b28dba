"""Receiver DSP: synchronization, equalizers, decoders."""

from .decode import LacoDecodeResult, dco_decode, laco_decode, pairwise_cancel
from .onetap import OneTapBank, OneTapEqualizer, one_tap_apply, one_tap_estimate
from .receiver import OfdmReceiver
from .sync import normalized_xcorr, synchronize
from .volterra import (
    EqualizerReport,
    VolterraEqualizer,
    VolterraWeights,
    quadratic_pairs,
    volterra_apply,
    volterra_train,
)

__all__ = [
    "EqualizerReport", "LacoDecodeResult", "OfdmReceiver", "OneTapBank", "OneTapEqualizer",
    "VolterraEqualizer", "VolterraWeights", "dco_decode", "laco_decode", "normalized_xcorr",
    "one_tap_apply", "one_tap_estimate", "pairwise_cancel", "quadratic_pairs", "synchronize",
    "volterra_apply", "volterra_train",
]
