"""Command-line interface: ``optofdm <subcommand> [options]``."""

import argparse
import logging
import sys

import numpy as np

from ..core import RealWaveform, Unit
from ..exceptions import ConfigError, OptOfdmError, StageError
from ..metrics import power_spectrum
from ..rx import VolterraEqualizer
from .config import ExperimentConfig, apply_overrides, load_config
from .io import read_owav, sweep_csv_text, write_owav
from .link import run_link_detailed, transmit
from .sweep import compare_formats, comparison_table, optimize_bias, sweep_rop

log = logging.getLogger("optofdm")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = list(args.override or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.format is not None:
        overrides.append(f"format={args.format}")
    if args.out is not None:
        overrides.append(f"output_path={args.out}")
    return apply_overrides(cfg, overrides)


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _metrics_text(res) -> str:
    m = res.metrics
    q_ber = f"{m.q_ber_db!r}" + (" (lower bound, no errors)" if m.q_ber_is_bound else "")
    lines = [
        f"format = {res.format}",
        f"equalizer = {res.equalizer}",
        f"rop_dbm = {res.rop_dbm!r}",
        f"bias_ma = {res.bias_ma!r}",
        f"seed = {res.seed}",
        f"sync_offset = {res.sync_offset}",
        f"bits = {m.bits_counted}",
        f"bit_errors = {m.bit_errors}",
        f"ber = {m.ber!r}",
        f"evm_rms = {m.evm_rms!r}",
        f"q_evm_db = {m.q_evm_db!r}",
        f"q_ber_db = {q_ber}",
        f"papr_db = {m.papr_db!r}",
    ]
    return "\n".join(lines) + "\n"


def cmd_tx_gen(args, cfg):
    if not cfg.output_path:
        raise ConfigError("tx-gen needs --out")
    bits, burst = transmit(cfg)
    write_owav(cfg.output_path, burst.waveform)
    log.info("wrote %d samples (%d payload bits, scale %.6g) to %s", burst.waveform.samples.size,
             bits.size, burst.scale, cfg.output_path)
    return EXIT_OK


def cmd_run_link(args, cfg):
    res = run_link_detailed(cfg)
    _emit(_metrics_text(res), cfg.output_path)
    return EXIT_OK


def cmd_sweep_rop(args, cfg):
    rows = sweep_rop(cfg, n_jobs=args.jobs)
    _emit(sweep_csv_text(rows, cfg), cfg.output_path)
    return EXIT_OK


def cmd_optimize_bias(args, cfg):
    rop = cfg.rxfe.rop_dbm if args.rop is None else args.rop
    bias, m = optimize_bias(cfg, rop)
    _emit(f"format = {cfg.format}\nequalizer = {cfg.rx.equalizer}\nrop_dbm = {float(rop)!r}\n"
          f"bias_ma = {bias!r}\nq_evm_db = {m.q_evm_db!r}\n"
          f"evaluations = {m.extra.get('bias_evaluations', 0)}\n", cfg.output_path)
    return EXIT_OK


def cmd_compare_formats(args, cfg):
    rows = compare_formats(cfg, rop=args.rop, lengths_km=tuple(args.lengths))
    _emit(comparison_table(rows), cfg.output_path)
    return EXIT_OK


def cmd_equalize(args, cfg):
    captured = read_owav(args.captured)
    reference = read_owav(args.reference)
    if np.iscomplexobj(captured.samples) or np.iscomplexobj(reference.samples):
        raise ConfigError("equalize works on real waveforms")
    if not cfg.output_path:
        raise ConfigError("equalize needs --out")
    x, d = captured.samples, reference.samples
    n_train = args.train_samples or min(x.size, d.size)
    if n_train > min(x.size, d.size):
        raise ConfigError(f"--train-samples {n_train} exceeds the waveform lengths")
    rx = cfg.rx
    eq = VolterraEqualizer(rx.memory, rx.mu1, rx.mu2, rx.epochs, rx.delay)
    eq.fit(x[:n_train], d[:n_train])
    y = eq.predict(x)
    write_owav(cfg.output_path, RealWaveform(y, captured.sample_rate, Unit.NORMALIZED))
    report = eq.report_.to_text()
    _emit(report, args.report or cfg.output_path + ".report.txt")
    return EXIT_OK


def cmd_spectrum(args, cfg):
    wave = read_owav(args.input)
    samples = wave.samples
    if np.iscomplexobj(samples):
        samples = np.abs(samples) ** 2
    f, p = power_spectrum(samples, wave.sample_rate, nperseg=args.nperseg)
    text = "frequency_hz,psd_db_per_hz\n" + "".join(
        f"{fi!r},{pi!r}\n" for fi, pi in zip(f.tolist(), p.tolist()))
    _emit(text, cfg.output_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value config file (or a sweep CSV)")
    common.add_argument("--seed", type=int, metavar="U64")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("dco", "laco"))
    common.add_argument("--override", action="append", metavar="KEY=VALUE",
                        help="set one config key; repeatable")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="optofdm", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("tx-gen", parents=[common], help="write the transmit drive waveform (OWAV)")
    s.set_defaults(func=cmd_tx_gen)
    s = sub.add_parser("run-link", parents=[common], help="simulate one operating point")
    s.set_defaults(func=cmd_run_link)
    s = sub.add_parser("sweep-rop", parents=[common], help="ROP sweep to CSV")
    s.add_argument("--jobs", type=int, default=None, help="parallel workers (sweep.n_jobs)")
    s.set_defaults(func=cmd_sweep_rop)
    s = sub.add_parser("optimize-bias", parents=[common], help="bias maximizing Q at one ROP")
    s.add_argument("--rop", type=float, default=None, help="received optical power, dBm")
    s.set_defaults(func=cmd_optimize_bias)
    s = sub.add_parser("compare-formats", parents=[common], help="LACO vs DCO delta-Q table")
    s.add_argument("--rop", type=float, default=-10.0)
    s.add_argument("--lengths", type=float, nargs="+", default=[0.0, 30.0], metavar="KM")
    s.set_defaults(func=cmd_compare_formats)
    s = sub.add_parser("equalize", parents=[common],
                       help="train a Volterra equalizer on a capture and write its output")
    s.add_argument("captured", help="received waveform (OWAV)")
    s.add_argument("reference", help="reference waveform (OWAV)")
    s.add_argument("--train-samples", type=int, default=None)
    s.add_argument("--report", metavar="PATH", help="report path (default: OUT.report.txt)")
    s.set_defaults(func=cmd_equalize)
    s = sub.add_parser("spectrum", parents=[common], help="Welch power spectrum of an OWAV file")
    s.add_argument("input")
    s.add_argument("--nperseg", type=int, default=1024)
    s.set_defaults(func=cmd_spectrum)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OptOfdmError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, StageError) and isinstance(exc.cause, ConfigError):
            return EXIT_CONFIG
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
