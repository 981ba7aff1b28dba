"""File formats: OWAV waveform files and sweep CSV files."""

import csv
import io
import struct
from dataclasses import astuple, dataclass, fields

import numpy as np

from ..channel import OpticalField
from ..core import RealWaveform, Unit
from ..exceptions import ConfigError
from .config import CSV_PREFIX, ExperimentConfig

OWAV_MAGIC = b"OWAV"
OWAV_VERSION = 1
KIND_REAL, KIND_COMPLEX = 0, 1
_HEADER = struct.Struct("<4sBBHd")  # 16 bytes


def encode_owav(samples, sample_rate: float) -> bytes:
    x = np.asarray(samples)
    kind = KIND_COMPLEX if np.iscomplexobj(x) else KIND_REAL
    if kind == KIND_COMPLEX:
        body = np.empty(2 * x.size, dtype="<f4")
        body[0::2] = x.real.ravel()
        body[1::2] = x.imag.ravel()
    else:
        body = x.ravel().astype("<f4")
    return _HEADER.pack(OWAV_MAGIC, OWAV_VERSION, kind, 0, float(sample_rate)) + body.tobytes()


def decode_owav(data: bytes):
    """Return ``(samples, sample_rate)``; complex samples come back as complex128."""
    if len(data) < _HEADER.size:
        raise ConfigError("OWAV file shorter than its 16-byte header")
    magic, version, kind, _, fs = _HEADER.unpack_from(data)
    if magic != OWAV_MAGIC:
        raise ConfigError(f"not an OWAV file (magic {magic!r})")
    if version != OWAV_VERSION:
        raise ConfigError(f"unsupported OWAV version {version}")
    if kind not in (KIND_REAL, KIND_COMPLEX):
        raise ConfigError(f"unknown OWAV sample kind {kind}")
    body = data[_HEADER.size:]
    if len(body) % (4 * (1 + kind)):
        raise ConfigError("OWAV payload is truncated")
    raw = np.frombuffer(body, dtype="<f4").astype(np.float64)
    if kind == KIND_COMPLEX:
        return raw[0::2] + 1j * raw[1::2], fs
    return raw, fs


def write_owav(path, wave):
    """Write a RealWaveform, OpticalField or bare array (sample rate 1)."""
    samples = getattr(wave, "samples", wave)
    fs = getattr(wave, "sample_rate", 1.0)
    with open(path, "wb") as fh:
        fh.write(encode_owav(samples, fs))


def read_owav(path, unit=Unit.NORMALIZED):
    with open(path, "rb") as fh:
        samples, fs = decode_owav(fh.read())
    if np.iscomplexobj(samples):
        return OpticalField(samples, fs)
    return RealWaveform(samples, fs, unit)


@dataclass
class SweepRow:
    format: str
    rop_dbm: float
    bias_ma: float
    equalizer: str
    q_evm_db: float
    q_ber_db: float
    ber: float
    evm: float
    bits: int
    seed: int


SWEEP_FIELDS = tuple(f.name for f in fields(SweepRow))


def _cell(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def sweep_csv_text(rows, cfg: ExperimentConfig) -> str:
    """CSV text: ``# config:`` header lines, then the SweepRow header and rows."""
    out = io.StringIO()
    for line in cfg.to_text().splitlines():
        # where the file lives is not part of how it was produced
        if not line.startswith("output_path "):
            out.write(f"{CSV_PREFIX} {line}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_FIELDS)
    for row in rows:
        writer.writerow([_cell(v) for v in astuple(row)])
    return out.getvalue()


def write_sweep_csv(path, rows, cfg: ExperimentConfig):
    text = sweep_csv_text(rows, cfg)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return text


def read_sweep_csv(path_or_text):
    """Parse sweep rows from a path or from CSV text."""
    if "\n" in str(path_or_text):
        text = str(path_or_text)
    else:
        with open(path_or_text, encoding="utf-8") as fh:
            text = fh.read()
    body = [line for line in text.splitlines() if not line.startswith("#")]
    reader = csv.reader(body)
    header = next(reader, None)
    if tuple(header or ()) != SWEEP_FIELDS:
        raise ConfigError(f"bad sweep CSV header {header}")
    rows = []
    for rec in reader:
        if len(rec) != len(SWEEP_FIELDS):
            raise ConfigError(f"incomplete sweep CSV row {rec}")
        rows.append(SweepRow(rec[0], float(rec[1]), float(rec[2]), rec[3], float(rec[4]),
                             float(rec[5]), float(rec[6]), float(rec[7]), int(rec[8]),
                             int(rec[9])))
    return rows
