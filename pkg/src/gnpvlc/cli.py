"""Command-line entry point: `gnpvlc <command> [--config file] [--out dir] ...`."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, default_scenario_dict, from_dict, load_scenario, wiretap_scenario_dict
from .experiments import COMMANDS, ExperimentError, run_experiment, write_outputs
from .variants import VARIANTS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gnpvlc", description="Vehicular VLC precoding sweeps with GNP plates.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="scenario JSON (defaults built in; wiretap default for `secrecy`)")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    ap.add_argument("--seed", type=int, help="override the scenario seed")
    ap.add_argument("--no-nlos", action="store_true", help="drop the road-bounce path from the physical channel")
    ap.add_argument("--variant", choices=VARIANTS, help="only run this scheme (sumrate, secrecy)")
    ap.add_argument("--svg", action="store_true", help="also write an SVG line plot")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is not None:
            config = load_scenario(args.config)
        else:
            config = from_dict(wiretap_scenario_dict() if args.command == "secrecy" else default_scenario_dict())
        if args.seed is not None:
            config = config.replace(seed=args.seed)
        table = run_experiment(config, args.command, args.variant, physical_nlos=not args.no_nlos)
        for path in write_outputs(table, config, args.out, args.svg):
            print(path)
    except (ConfigError, ExperimentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
