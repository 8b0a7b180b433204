#!/usr/bin/env python3

# Copyright 2024 Canonical Ltd.
# See LICENSE file for licensing details.

"""Command line entry point: run a scenario, optimize one problem or validate the model."""

import argparse
import logging
import sys
import typing

from harness.invariants import run_invariants
from harness.scenario import OPT_COLUMNS, build_optimizer, design_cells, run_scenario
from harness.table import ResultTable, build_metadata, emit_table, render_table
from mathkit import Rng
from state.config import SCENARIOS, ExperimentConfig, load_config, resolve_config
from state.validation import EXIT_FAILURE, EXIT_OK, report_failures

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser.

    Returns:
        The parser with the run, optimize and validate subcommands.
    """
    parser = argparse.ArgumentParser(
        prog="wpcr-frame-design",
        description="Frame design of wireless-powered cognitive radio networks.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration; defaults when omitted.")
    common.add_argument("--seed", type=int, help="Override experiment.base_seed.")
    common.add_argument("--trials", type=int, help="Override experiment.trials.")
    common.add_argument("--out", help="Result table path.")
    common.add_argument(
        "--log-level",
        default="INFO",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        help="Root logger level.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    run = commands.add_parser("run", parents=[common], help="Run a scenario sweep.")
    run.add_argument("scenario", choices=SCENARIOS)
    optimize = commands.add_parser(
        "optimize", parents=[common], help="Optimize the configured frame design problem."
    )
    optimize.add_argument("variant", choices=("p0", "p1"))
    commands.add_parser("validate", parents=[common], help="Run the invariant suite.")
    return parser


def resolve_arguments(args: argparse.Namespace) -> ExperimentConfig:
    """Load the configuration and apply the command line overrides.

    Args:
        args: Parsed arguments.

    Returns:
        ExperimentConfig: the resolved configuration.
    """
    config = load_config(args.config) if args.config else resolve_config({})
    overrides: dict[str, typing.Any] = {
        "experiment.scenario": getattr(args, "scenario", None),
        "experiment.base_seed": args.seed,
        "experiment.trials": args.trials,
        "experiment.output_path": args.out,
        "optimizer.variant": getattr(args, "variant", None),
    }
    for name, value in overrides.items():
        if value is not None:
            config = config.override(name, value)
    return config


def _finish(table: ResultTable, config: ExperimentConfig, path: typing.Optional[str]) -> int:
    """Write or print the table; flagged rows turn into EXIT_FAILURE."""
    if path:
        emit_table(table, path, config)
    else:
        sys.stdout.write(render_table(table))
    flagged = table.flagged()
    if flagged:
        logger.error("%d of %d rows are flagged as failed", flagged, len(table.rows))
        return EXIT_FAILURE
    return EXIT_OK


@report_failures
def run_command(args: argparse.Namespace) -> int:
    """Run a scenario sweep.

    Args:
        args: Parsed arguments.

    Returns:
        The exit code.
    """
    config = resolve_arguments(args)
    return _finish(run_scenario(config), config, config.experiment.output_path)


@report_failures
def optimize_command(args: argparse.Namespace) -> int:
    """Optimize one frame design problem with the configured method.

    Args:
        args: Parsed arguments.

    Returns:
        The exit code.
    """
    config = resolve_arguments(args)
    spec = config.problem_spec()
    optimizer = build_optimizer(config, Rng(base_seed=config.experiment.base_seed))
    result = optimizer.optimize(spec)
    metadata = build_metadata(config)
    metadata["scenario"] = f"optimize-{spec.variant}"
    table = ResultTable(
        columns=("variant", "method") + OPT_COLUMNS,
        rows=((spec.variant, result.method) + design_cells(result),),
        metadata=metadata,
    )
    return _finish(table, config, config.experiment.output_path)


@report_failures
def validate_command(args: argparse.Namespace) -> int:
    """Run the invariant suite.

    Args:
        args: Parsed arguments.

    Returns:
        The exit code.
    """
    config = resolve_arguments(args)
    return _finish(run_invariants(config), config, args.out)


COMMANDS: dict[str, typing.Callable[[argparse.Namespace], int]] = {
    "run": run_command,
    "optimize": optimize_command,
    "validate": validate_command,
}


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    """Parse the arguments, configure logging and dispatch.

    Args:
        argv: Arguments without the program name; sys.argv by default.

    Returns:
        The exit code.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)
    return COMMANDS[args.command](args)


if __name__ == "__main__":  # pragma: nocover
    sys.exit(main())
