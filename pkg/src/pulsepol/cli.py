"""Command-line front end.

Subcommands: vacuum, sweep, qnd, two-pulse, waveform.  Exit codes:
0 success, 2 config error, 3 simulation error, 4 analysis error.  The
PULSEPOL_OUT environment variable sets the default output root; --out
overrides it with an explicit directory.
"""

from __future__ import annotations

import argparse
import sys

from .config import (
    SWEEP_PHOTON_NUMBERS,
    RunConfig,
    default_run_config,
    default_qnd_config,
    load_run_config,
    parse_quantity,
)
from .errors import AnalysisError, ConfigError, SimulationError
from .runners import (
    OUTPUT_ROOT_ENV,
    run_qnd,
    run_sweep,
    run_two_pulse,
    run_vacuum,
    run_waveform_demo,
)
from .stokes import CountingModel

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_ANALYSIS = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsepol",
        description="Pulse polarimetry simulator: vacuum noise, scaling, QND probing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", help="YAML run configuration")
        p.add_argument("--seed", type=int, help="override the run seed")
        p.add_argument("--pulses", type=int, help="override the number of pulses")
        p.add_argument(
            "--out",
            metavar="DIR",
            help=f"output directory (default: config, then ${OUTPUT_ROOT_ENV}/<command>)",
        )
        p.add_argument(
            "--model",
            choices=[m.value for m in CountingModel],
            help="override the counting model",
        )

    p = sub.add_parser("vacuum", help="no-atom pulse train through the full chain")
    add_common(p)

    p = sub.add_parser("sweep", help="vacuum sigma versus photon number, fit sqrt(eps*J/2)")
    add_common(p)
    p.add_argument(
        "--photon-numbers",
        metavar="LIST",
        help="comma-separated 2J values (default "
        + ",".join(f"{v:g}" for v in SWEEP_PHOTON_NUMBERS)
        + ")",
    )

    p = sub.add_parser("qnd", help="spin-broadened distribution and variance budget")
    add_common(p)

    p = sub.add_parser("two-pulse", help="repeated probing of one spin state")
    add_common(p)
    p.add_argument(
        "--separation",
        default="5 us",
        metavar="QTY",
        help="pulse separation with unit, e.g. '5 us' (default)",
    )

    p = sub.add_parser("waveform", help="emit preamp and shaper traces for one charge")
    add_common(p)
    p.add_argument(
        "--charge",
        type=float,
        default=1e6,
        metavar="ELECTRONS",
        help="injected charge in electrons (default 1e6)",
    )
    return parser


def _load_config(args) -> RunConfig:
    if args.config:
        config = load_run_config(args.config)
    elif args.command == "qnd":
        config = default_qnd_config()
    else:
        config = default_run_config()
    model = CountingModel(args.model) if args.model else None
    return config.with_overrides(seed=args.seed, n_pulses=args.pulses, counting_model=model)


def _print_summary(summary: dict) -> None:
    for key, value in summary.items():
        if value is None:
            continue
        print(f"{key}: {value}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        if args.command == "vacuum":
            result = run_vacuum(config, out_dir=args.out)
            _print_summary(result.summary)
            print(f"outputs: {result.out_dir}")
            if result.fit_error:
                print(f"error: {result.fit_error}", file=sys.stderr)
                return EXIT_ANALYSIS
        elif args.command == "sweep":
            photon_numbers = None
            if args.photon_numbers:
                try:
                    photon_numbers = [float(v) for v in args.photon_numbers.split(",") if v]
                except ValueError:
                    raise ConfigError(
                        f"--photon-numbers: expected comma-separated numbers, got {args.photon_numbers!r}"
                    ) from None
            result = run_sweep(config, photon_numbers=photon_numbers, out_dir=args.out)
            _print_summary(result.summary)
            print(f"outputs: {result.out_dir}")
        elif args.command == "qnd":
            result = run_qnd(config, out_dir=args.out)
            _print_summary(result.summary)
            print(f"outputs: {result.out_dir}")
        elif args.command == "two-pulse":
            separation = parse_quantity(args.separation, "time", "--separation")
            result = run_two_pulse(config, separation, out_dir=args.out)
            _print_summary(result.summary)
            print(f"outputs: {result.out_dir}")
            if result.analysis_error:
                print(f"error: {result.analysis_error}", file=sys.stderr)
                return EXIT_ANALYSIS
        elif args.command == "waveform":
            result = run_waveform_demo(config, args.charge, out_dir=args.out)
            _print_summary(result.summary)
            print(f"outputs: {result.out_dir}")
        else:  # pragma: no cover - argparse enforces the choices
            raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
