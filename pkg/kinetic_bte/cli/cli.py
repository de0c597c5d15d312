"""Command line entry point."""

import argparse
import logging
import sys

from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from ..client import KineticClient
from ..errors import KineticError, ScenarioParseError, ScenarioValidationError
from ..models.scenario import Scenario
from . import pipelines
from .scenario import load_scenario


logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

COMMANDS = ("simulate", "semigroup", "cycles", "kernel-check", "entropy", "picard", "report")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser."""
    parser = argparse.ArgumentParser(prog="kinetic-bte", description="Kinetic Boltzmann solver and checks")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--scenario", type=Path, help="Path to a YAML scenario; defaults apply without one")
    parser.add_argument("--seed", type=int, help="Override the scenario seed")
    parser.add_argument("--workers", type=int, help="Worker threads, KINETIC_BTE_WORKERS by default")
    parser.add_argument("--out", type=Path, help="Output directory, the scenario's by default")
    parser.add_argument("--snapshot-every", type=int, help="Steps between state snapshots, 0 disables them")
    parser.add_argument("--amplitudes", type=float, nargs="+", help="Picard sweep amplitudes")
    parser.add_argument("--input", type=Path, help="Diagnostics CSV read by report")
    parser.add_argument("--plot", action="store_true", help="Write PNG plots from report")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level",
    )
    return parser


def configure_logging(level: str) -> None:
    """Configure root logging."""
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)
    logging.captureWarnings(True)


def exit_code(error: BaseException) -> int:
    """Map an error to the process exit code."""
    match error:
        case ScenarioParseError() | ScenarioValidationError() | ValidationError():
            return EXIT_VALIDATION
        case KineticError():
            return EXIT_NUMERICAL
        case OSError():
            return EXIT_IO
        case _:
            raise error


def dispatch(command: str, scenario: Scenario, args: Optional[argparse.Namespace] = None) -> int:
    """Run the pipeline of a subcommand and return the exit code."""
    args = args or build_parser().parse_args([command])
    out = args.out or Path(scenario.output.directory)

    try:
        if command == "report":
            pipelines.report(args.input or out / "diagnostics.csv", out, plot=args.plot)
            return EXIT_SUCCESS

        client = KineticClient(scenario, workers=args.workers, seed=args.seed)
        match command:
            case "simulate":
                pipelines.simulate(client, out)
            case "semigroup":
                pipelines.semigroup(client, out)
            case "cycles":
                pipelines.cycles(client, out)
            case "kernel-check":
                pipelines.kernel_check(client, out)
            case "entropy":
                pipelines.entropy(client, out)
            case "picard":
                pipelines.picard(client, out, amplitudes=args.amplitudes)
            case _:
                raise ValueError(f"unknown command {command}")
    except (KineticError, ValidationError, OSError) as error:
        code = exit_code(error)
        logger.error("%s failed: %s", command, error)
        return code

    return EXIT_SUCCESS


def main(argv: Optional[List[str]] = None) -> int:
    """Command line entry point."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        scenario = load_scenario(args.scenario) if args.scenario else Scenario()
        if args.snapshot_every is not None:
            output = scenario.output.model_copy(update={"snapshot_every": args.snapshot_every})
            scenario = Scenario.model_validate({**scenario.model_dump(), "output": output.model_dump()})
    except (KineticError, ValidationError, OSError) as error:
        logger.error("Invalid scenario: %s", error)
        return exit_code(error)

    return dispatch(args.command, scenario, args)


if __name__ == "__main__":
    sys.exit(main())
