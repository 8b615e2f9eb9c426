"""Command-line entry point."""
from __future__ import annotations

import argparse
import logging
import sys

from . import driver
from .grid import GridError

# CLI flag -> SimConfig field
_FLAGS = {
    "nx": "n_x", "ny": "n_y", "xw_lambda": "x_w", "yw_lambda": "y_w", "kl": "k_L",
    "eps": "eps", "g0": "g0", "t": "T", "k0": "k0", "workers": "workers", "out": "out",
}


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat 'key = value' configuration file")
    parser.add_argument("--nx", type=int)
    parser.add_argument("--ny", type=int)
    parser.add_argument("--xw-lambda", type=float, help="x box width in wavelengths")
    parser.add_argument("--yw-lambda", type=float, help="y box width in wavelengths")
    parser.add_argument("--kl", type=float, help="laser wave number (mc/hbar)")
    parser.add_argument("--eps", type=float, help="diffraction angle")
    parser.add_argument("--g0", type=float, help="coupling qA0 (mc^2)")
    parser.add_argument("--t", type=float, help="interaction duration (hbar/mc^2)")
    parser.add_argument("--k0", type=float, help="transverse electron momentum (mc/hbar)")
    parser.add_argument("--no-longitudinal", action="store_true",
                        help="drop the longitudinal field component")
    parser.add_argument("--negative-final", action="store_true",
                        help="also compute negative-energy final amplitudes")
    parser.add_argument("--sequential", action="store_true", help="force a single process")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kapitza-dirac",
                                     description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "single diffraction run"),
        ("sweep-y-pos", "refine the y position grid at fixed width"),
        ("sweep-y-mom", "refine the y momentum grid (count and width together)"),
        ("sweep-x", "triangular x resolution study"),
        ("ablate-longitudinal", "paired runs with and without the longitudinal component"),
        ("field-dump", "write beam tables in position and momentum space"),
        ("count", "print the contribution counts"),
    ):
        _common(sub.add_parser(name, help=help_text))
    return parser


def resolve_config(args) -> driver.SimConfig:
    overrides = {field: getattr(args, flag) for flag, field in _FLAGS.items()}
    if args.no_longitudinal:
        overrides["include_longitudinal"] = False
    if args.negative_final:
        overrides["compute_negative_final"] = True
    if args.sequential:
        overrides["workers"] = 1
    if args.config:
        config = driver.load_config(args.config, **overrides)
    else:
        config = driver.SimConfig(**{k: v for k, v in overrides.items() if v is not None})
    if config.workers < 1:
        raise driver.ConfigError("workers must be >= 1")
    return config


def _print_report(label: str, report: driver.RunReport):
    print(f"{label}: max_up={report.max_up:.6e} max_down={report.max_down:.6e} "
          f"ratio={report.ratio:.4f} iterations={report.iterations} "
          f"guards={report.guard_activations} time={report.wall_time:.2f}s")


def dispatch(args) -> int:
    config = resolve_config(args)
    cmd = args.command
    if cmd == "count":
        driver.build_scenario(config)
        print(f"scenario_count={driver.scenario_count(config)}")
        print(f"general_count={driver.count_iterations(2, 2, 0, (config.n_x, config.n_y))}")
    elif cmd == "run":
        _print_report("run", driver.run(config).report)
    elif cmd == "sweep-y-pos":
        for r in driver.sweep_y_position(config):
            _print_report(f"n_y={r.config.n_y}", r.report)
    elif cmd == "sweep-y-mom":
        for r in driver.sweep_y_momentum(config):
            _print_report(f"n_y={r.config.n_y} y_w={r.config.y_w:g}", r.report)
    elif cmd == "sweep-x":
        for (row, col), r in driver.sweep_x(config).items():
            _print_report(f"[{row},{col}] n_x={r.config.n_x} x_w={r.config.x_w:g}", r.report)
    elif cmd == "ablate-longitudinal":
        with_l, without = driver.ablate_longitudinal(config)
        _print_report("with", with_l.report)
        _print_report("without", without.report)
    elif cmd == "field-dump":
        tables = driver.field_dump(config)
        print("wrote " + ", ".join(sorted(tables)) if config.out else
              "computed " + ", ".join(sorted(tables)) + " (no --out given)")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return dispatch(args)
    except (driver.ConfigError, GridError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
