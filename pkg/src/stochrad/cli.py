"""Command-line entry point; each subcommand runs one scenario.

Usage::

    stochrad compare-orders --out results
    stochrad oracle-check --config oracle.json --scaled
    stochrad mc-estimate --seed 7 --format json
"""
from __future__ import annotations

import argparse
import json
import sys

from .experiments import (EXIT_CONFIG, EXIT_IO, ScenarioConfig, run_scenario)
from .errors import InvalidParameterError

SUBCOMMANDS = {
    "roots": "roots",
    "kernels": "kernels",
    "spectrum": "spectrum-sweep",
    "finite-time": "finite-time",
    "oracle-check": "oracle-check",
    "compare-orders": "compare-orders",
    "convergence-scan": "convergence-scan",
    "mc-estimate": "mc-estimate",
}

HELP = {
    "roots": "zeros of H(z), exact and small-omega0 approximation",
    "kernels": "evaluate a response kernel on the time grid",
    "spectrum": "closed-form emission rates on the frequency grid",
    "finite-time": "finite-time emission rate on the frequency x time grid",
    "oracle-check": "compare residue kernels and rates with brute-force oracles",
    "compare-orders": "free-particle rates from different orders of limits",
    "convergence-scan": "approach of the finite-time rate to its asymptote",
    "mc-estimate": "Monte-Carlo semiclassical rate estimate",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stochrad", description="Photon emission from a noise-driven charge.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", metavar="PATH", help="JSON scenario configuration")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), help="data file format")
        p.add_argument("--seed", type=int, help="Monte-Carlo master seed")
        units = p.add_mutually_exclusive_group()
        units.add_argument("--scaled", dest="units", action="store_const", const="scaled",
                           help="read parameters in scaled units (m = beta = c = |e| = 1)")
        units.add_argument("--si", dest="units", action="store_const", const="si",
                           help="read parameters in SI units (default)")
        p.add_argument("--quiet", action="store_true", help="suppress the summary table")
    return parser


def _load(args):
    overrides = {"scenario": SUBCOMMANDS[args.command]}
    if args.out:
        overrides.setdefault("output", {})["dir"] = args.out
    if args.format:
        overrides.setdefault("output", {})["format"] = args.format
    if args.seed is not None:
        overrides["ensemble"] = {"master_seed": args.seed}
    if args.units:
        overrides["units"] = args.units
    if args.config:
        return ScenarioConfig.from_json(args.config, overrides)
    return ScenarioConfig.from_dict(overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvalidParameterError, KeyError, TypeError, ValueError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = run_scenario(cfg)
    if result.message:
        print(result.message, file=sys.stderr)
    if not args.quiet and result.table:
        print(result.format_table())
        print(json.dumps(result.summary, default=str))
        for path in result.files:
            print(f"wrote {path}")
    return result.status


if __name__ == "__main__":
    sys.exit(main())
