"""
Command-line entry point: ``mlleak <subcommand> --config study.json``.

Subcommands:
    train-target  Train and checkpoint every target of the grid
    attack        Run the attack grid against the checkpoints
    report        Aggregate cell files into report.csv and summary.json
    full-suite    All three in sequence

On success a one-line JSON summary is printed to stdout and the exit code
is 0. On failure a one-line JSON error goes to stderr and the exit code is
1 (2 for argument errors). Logs go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import runner
from .exceptions import MLLeakConfigurationError, MLLeakError
from .schemas import RiskReport

_log = logging.getLogger(__name__)

PROFILES = ("paper-faithful", "fast")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return seed


def _jobs(value: str) -> int:
    jobs = int(value)
    if jobs < 1:
        raise argparse.ArgumentTypeError(f"jobs must be >= 1, got {value}")
    return jobs


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment document (JSON)")
    common.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    common.add_argument("--seed", type=_seed, help="root seed (overrides root_seed)")
    common.add_argument("--jobs", type=_jobs, help="maximum concurrent grid jobs")
    common.add_argument("--profile", choices=PROFILES, help="training budget profile")
    common.add_argument(
        "--log-level",
        choices=LOG_LEVELS,
        default=os.getenv("MLLEAK_LOG_LEVEL", "WARNING").upper(),
        help="stderr log level (default: $MLLEAK_LOG_LEVEL or WARNING)",
    )

    parser = argparse.ArgumentParser(
        prog="mlleak",
        description="Membership, attribute and stealing attacks against desk-scale models.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("train-target", parents=[common], help="train and checkpoint targets")
    commands.add_parser("attack", parents=[common], help="attack trained targets")
    commands.add_parser("report", parents=[common], help="build report.csv and summary.json")
    commands.add_parser("full-suite", parents=[common], help="train, attack and report")
    return parser


def _settings(args: argparse.Namespace) -> runner.RunSettings:
    if args.config is None:
        raise MLLeakConfigurationError(f"{args.command} needs --config")
    document = runner.load_config(args.config)
    return runner.resolve_settings(
        document,
        out=args.out,
        seed=args.seed,
        jobs=args.jobs,
        profile=args.profile,
        base_dir=args.config.parent,
    )


def _report_summary(report: RiskReport, out_dir: Path) -> dict[str, Any]:
    return {
        "cells": len(report.cells),
        "skipped": len(report.skipped),
        "csv": str(out_dir / runner.CSV_NAME),
        "summary": str(out_dir / runner.SUMMARY_NAME),
    }


def run(args: argparse.Namespace) -> dict[str, Any]:
    """Execute a parsed command and return its JSON summary."""
    if args.command == "report":
        if args.out is not None:
            out_dir = args.out
        elif args.config is not None:
            out_dir = Path(runner.load_config(args.config).output_dir)
        else:
            raise MLLeakConfigurationError("report needs --out or --config")
        return {"command": "report", **_report_summary(runner.cmd_report(out_dir), out_dir)}

    settings = _settings(args)
    summary: dict[str, Any] = {"command": args.command, "out": str(settings.out_dir)}
    if args.command == "train-target":
        records = runner.cmd_train_target(settings)
        summary["targets"] = len(records)
    elif args.command == "attack":
        cells = runner.cmd_attack(settings)
        summary["cells"] = len(cells)
    else:
        report = runner.cmd_full_suite(settings)
        summary.update(_report_summary(report, settings.out_dir))
    return summary


def error_line(error: MLLeakError) -> str:
    """Machine-readable one-line description of a failure."""
    payload: dict[str, Any] = {"error": type(error).__name__, "message": str(error)}
    for attribute in ("path", "epoch", "required"):
        value = getattr(error, attribute, None)
        if value is not None:
            payload[attribute] = value
    return json.dumps(payload, sort_keys=True)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        summary = run(args)
    except MLLeakError as e:
        _log.debug("Command failed", exc_info=True)
        print(error_line(e), file=sys.stderr)
        return 1
    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
