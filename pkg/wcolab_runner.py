"""
Module: wcolab_runner.py

Description:
------------
Main CLI entry point for the weighted composition operator lab. Runs one command against a
scenario file (or a built-in scenario) and writes its artifacts.

Supported Commands:
-------------------
- norm     : Norm bounds of the realized element for each --p
- verify   : Run the checkers named by --checks (or --all) at each --p (default 2)
- twist    : Twisted element for every character of the acting group
- adjoint  : Formal-adjoint matrix on ℓ^∞
- demo     : Built-in running scenario plus the non-free counterexample
- batch    : --count seeded random scenarios through the full checker suite

Exit Codes:
-----------
0 every expectation met, 1 some report failed its expectation, 2 error.

Usage Example:
--------------
$ python wcolab_runner.py verify --scenario scenarios/z2_running.json --all --out reports/
$ python wcolab_runner.py norm --scenario builtin:running --p 1,2,inf
$ python wcolab_runner.py batch --count 200 --seed 7 --format xlsx --out reports/
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Optional

from src.commands import COMMANDS, CommandResult, RunOptions, parse_exponents, run_command
from src.config import Config
from src.errors import UnsupportedExponentError
from src.logger import setup_logging
from src.scenarios import resolve_scenario
from src.verify import CHECK_NAMES

logger = setup_logging(Config.RUNNER_LOG_FILE, logger_name="wcolab.runner")


def validate_exponents(text: str):
    """
    Validates a comma-separated exponent list such as "1,1.5,inf".

    Raises:
        argparse.ArgumentTypeError: If a token is not an exponent in [1, inf].
    """
    try:
        return parse_exponents(text)
    except UnsupportedExponentError as e:
        raise argparse.ArgumentTypeError(str(e))


def validate_seed(text: str) -> int:
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid seed: '{text}'. Use an unsigned 64-bit integer.")
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"Seed out of range: {seed}")
    return seed


def validate_checks(text: str):
    if text.strip() == "all":
        return CHECK_NAMES
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    unknown = [n for n in names if n not in CHECK_NAMES]
    if unknown:
        raise argparse.ArgumentTypeError(f"Unknown checks {unknown}; choose from {list(CHECK_NAMES)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Run the weighted composition operator lab")
    parser.add_argument("command", choices=COMMANDS, help="Command to run")
    parser.add_argument("--scenario", type=str, help="Scenario JSON path, or builtin:running / builtin:counterexample")
    parser.add_argument("--p", dest="ps", type=validate_exponents, default=(), help="Exponents, e.g. 1,1.5,inf")
    parser.add_argument("--seed", type=validate_seed, help="Seed for every randomized procedure")
    parser.add_argument("--checks", type=validate_checks, default=(), help="Checker names, comma separated, or 'all'")
    parser.add_argument("--all", action="store_true", help="Run every checker (same as --checks all)")
    parser.add_argument("--out", type=Path, help="Directory for report files")
    parser.add_argument("--format", dest="fmt", choices=["json", "csv", "xlsx"], default="json")
    parser.add_argument("--restarts", type=int, default=None, help=f"Random restarts per search (default {Config.DEFAULT_RESTARTS})")
    parser.add_argument("--count", type=int, default=20, help="Number of random scenarios for batch")
    parser.add_argument("--dim", type=int, default=1, help="Fiber dimension for batch scenarios")
    parser.add_argument("--db", action="store_true", help="Append reports to the DuckDB report store")
    parser.add_argument("--run-label", dest="run_label", type=str, help="Run label in the report store")
    return parser


def execute_command(name: str, func: Callable[[], CommandResult]) -> int:
    """
    Executes a command with logging and error handling.

    Returns:
        int: the command's exit code, or 2 when it raised.
    """
    logger.info(f"Starting command: {name}")
    try:
        result = func()
    except Exception as e:
        logger.exception(f"Command failed: {name}: {e}")
        return 2
    for line in result.summary:
        print(line)
    for path in result.artifacts:
        logger.info(f"Artifact: {path}")
    return result.exit_code


def main(argv: Optional[list] = None) -> None:
    """Parse arguments, load the scenario and run the command."""
    args = build_parser().parse_args(argv)
    if args.restarts is not None and args.restarts < Config.DEFAULT_RESTARTS:
        logger.warning(f"--restarts {args.restarts} is below the default of {Config.DEFAULT_RESTARTS}")

    options = RunOptions(
        ps=args.ps,
        seed=args.seed,
        checks=CHECK_NAMES if args.all else args.checks,
        out=args.out,
        fmt=args.fmt,
        restarts=args.restarts,
        count=args.count,
        dim=args.dim,
        db=args.db,
        run_label=args.run_label,
    )

    def run() -> CommandResult:
        scenario = resolve_scenario(args.scenario) if args.scenario else None
        return run_command(args.command, scenario, options)

    code = execute_command(args.command, run)
    if code == 0:
        logger.info("Run completed; every expectation met.")
    else:
        logger.error(f"Run completed with exit code {code}.")
    sys.exit(code)


if __name__ == "__main__":
    main()
