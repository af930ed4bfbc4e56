"""Command line interface.

    takens-nf <command> --config run.json [--out DIR] [--window W] [--gamma-min A --gamma-max B] [--samples S]
              [--order-N N] [--order-N0 N0] [--jets-J J] [--tol TOL] [--seed SEED] [--force] [--csv]

Exit status 0 on success, 2 when a hypothesis of the reduction fails (the report holds the witness) and 1 on usage
errors: invalid configuration, unreadable JSON or misuse of an operation.
"""
import argparse
import json
import logging
import sys
from typing import Sequence

from pydantic import ValidationError

from takens_nf import __version__
from takens_nf.exceptions import MathematicalPreconditionError, TakensNFException
from takens_nf.runner import COMMANDS, EXIT_PRECONDITION, EXIT_USAGE, TakensRunner
from takens_nf.schemas import parse_config

_logger = logging.getLogger(__name__)


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="takens-nf", description="Nonautonomous Takens normal forms at jet level.")
    parser.add_argument("command", choices=COMMANDS, help="Command to run.")
    parser.add_argument("--config", required=True, help="JSON run configuration.")
    parser.add_argument("--out", help="Output directory of the report and CSV tables.")
    parser.add_argument("--window", type=int, help="Window W; the cocycle is sampled on [-2W, 2W].")
    parser.add_argument("--gamma-min", type=float, help="Lower end of the gamma grid.")
    parser.add_argument("--gamma-max", type=float, help="Upper end of the gamma grid.")
    parser.add_argument("--samples", type=int, help="Number of gamma samples.")
    parser.add_argument("--order-N", dest="order_N", type=int, help="Order of the non-resonance conditions.")
    parser.add_argument("--order-N0", dest="order_N0", type=int, help="Order of the normal form.")
    parser.add_argument("--jets-J", dest="jets_J", type=int, help="Highest x_c-degree of the removed couplings.")
    parser.add_argument("--tol", type=float, help="Accuracy of the series solvers.")
    parser.add_argument("--seed", type=int, help="Seed of the random families and of the sampled directions.")
    parser.add_argument("--force", action="store_true", help="Compute the normal form despite failed checks.")
    parser.add_argument("--csv", action="store_true", default=None, help="Also write CSV tables.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", help="Log debug messages.")
    verbosity.add_argument("--quiet", "-q", action="store_true", help="Log errors only.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser.parse_args(argv)


def overrides_from_args(args: argparse.Namespace) -> dict:
    """Nested configuration values given by flags; flags that were not given are left out."""
    flags = {
        ("output", "out"): args.out,
        ("window",): args.window,
        ("spectrum", "gamma_lo"): args.gamma_min,
        ("spectrum", "gamma_hi"): args.gamma_max,
        ("spectrum", "samples"): args.samples,
        ("orders", "N"): args.order_N,
        ("orders", "N0"): args.order_N0,
        ("orders", "J"): args.jets_J,
        ("tolerances", "tol"): args.tol,
        ("system", "seed"): args.seed,
        ("output", "csv"): args.csv,
    }
    overrides: dict = {}
    for keys, value in flags.items():
        if value is None:
            continue
        section = overrides
        for key in keys[:-1]:
            section = section.setdefault(key, {})
        section[keys[-1]] = value
    return overrides


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        config = parse_config(args.config, overrides_from_args(args))
    except (ValidationError, json.JSONDecodeError) as error:
        print(f"Invalid configuration {args.config}: {error}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as error:
        print(f"Cannot read configuration {args.config}: {error}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return TakensRunner(config, force=args.force).run(args.command)
    except MathematicalPreconditionError as error:
        # raised outside of a command, e.g. while building the system
        print(f"{type(error).__name__}: {error}", file=sys.stderr)
        return EXIT_PRECONDITION
    except TakensNFException as error:
        print(f"{type(error).__name__}: {error}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
