"""Optical OFDM (DCO and layered ACO) modem and IM/DD link simulator."""

from .core import Format, OfdmConfig, RealWaveform, SymbolFrame

__version__ = "0.1.0"

__all__ = ["Format", "OfdmConfig", "RealWaveform", "SymbolFrame", "__version__"]
