"""Command line entry point.

Usage: mblq <kind> --config <file> [--seed S] [--out DIR] [--workers N]
[--emit-plots].  Exit code 0 on success (the manifest path is printed),
1 on configuration errors, 2 on runtime failures.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import KINDS, ConfigError, run_experiment, validate_config

__all__ = ["build_parser", "main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mblq",
        description="Disordered-chain quench experiments: spectral "
                    "statistics, output-distribution convergence, temporal "
                    "memory, and best-of-D generative training.",
    )
    parser.add_argument("kind", choices=KINDS, help="experiment to run")
    parser.add_argument("--config", required=True, metavar="FILE",
                        help="configuration file ([section] + key = value)")
    parser.add_argument("--seed", type=int, default=None, metavar="S",
                        help="override the master seed")
    parser.add_argument("--out", default=None, metavar="DIR",
                        help="override the output directory")
    parser.add_argument("--workers", type=int, default=None, metavar="N",
                        help="override the worker process count")
    parser.add_argument("--emit-plots", action="store_true",
                        help="also render SVG plots (needs matplotlib)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config file: {exc}", file=sys.stderr)
        return 1
    try:
        config = validate_config(text, kind=args.kind)
        overrides = {}
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if args.out is not None:
            overrides["output_dir"] = args.out
        if args.workers is not None:
            overrides["workers"] = args.workers
        if args.emit_plots:
            overrides["emit_plots"] = True
        if overrides:
            config = replace(config, **overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        run_experiment(config)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(Path(config.output_dir) / "manifest.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
