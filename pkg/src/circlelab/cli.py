"""Command-line entry point.

    circlelab <subcommand> --config FILE [--seed U64] [--threads N] [--out DIR] [--no-plots]

Subcommands: lyapunov, stationary, dichotomy, contract, basin, hyperbolic,
xi, lln. Every run writes report.json plus CSV data files (and PNG figures
unless --no-plots) into the output directory. Exit codes: 0 success,
2 config validation error, 3 internal numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .config import SUBCOMMANDS, ConfigError, effective_seed, load_config, validate_config
from .contraction import write_certificates_json
from .reports import build_report, write_csv, write_report
from .runners import RUNNERS, NumericalFailure


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circlelab",
        description="Random circle-map systems and hyperbolic-leaf diffusions: "
        "Lyapunov exponents, stationary measures, dichotomy classification, "
        "contraction certificates.",
    )
    parser.add_argument("--version", action="version", version=f"circlelab {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
        p.add_argument("--threads", type=int, default=1, help="worker thread cap")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        raw = load_config(args.config)
        eff = validate_config(args.subcommand, raw)
        seed = effective_seed(eff, args.seed)
        if args.threads < 1:
            raise ConfigError(f"threads: must be >= 1, got {args.threads}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    eff["seed"] = seed
    out_dir = args.out or raw.get("out") or f"circlelab-{args.subcommand}"
    eff["out"] = out_dir
    os.makedirs(out_dir, exist_ok=True)

    try:
        results, files, plot_data = RUNNERS[args.subcommand](eff, seed, args.threads)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3

    report = build_report(args.subcommand, eff, results, __version__)
    write_report(report, os.path.join(out_dir, "report.json"))
    for name, (header, rows) in files.items():
        write_csv(os.path.join(out_dir, name), header, rows)

    if args.subcommand == "contract":
        mode = plot_data["save_traces"]
        if mode != "none":
            certs = plot_data["certs"]
            if mode == "failures":
                kept = [c for c in certs if not c.valid] or certs[:3]
            else:
                kept = certs
            write_certificates_json(kept, os.path.join(out_dir, "certificates.json"))

    if not args.no_plots:
        from .plots import PLOTTERS

        PLOTTERS[args.subcommand](plot_data, out_dir)

    print(f"{args.subcommand}: report written to {os.path.join(out_dir, 'report.json')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
