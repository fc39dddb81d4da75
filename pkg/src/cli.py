#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""The kinscan command line."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

from commands import COMMANDS, StageError
from commands.base import given
from constants import EXIT_CONFIG_INVALID, EXIT_OK, EXIT_STAGE_FAILED
from core.context import OutputPathError, RunContext
from core.run_config import RunConfigInvalidError, parse_config
from utils.logging import setup_logging

logger = logging.getLogger(__name__)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML configuration file")
    common.add_argument("--out-dir", type=Path, help="directory receiving every output")
    common.add_argument("--threads", type=int, help="worker thread cap")
    common.add_argument("--seed", type=int, help="run seed")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per command handler."""
    parser = argparse.ArgumentParser(
        prog="kinscan",
        description="LiDAR correspondences and Dynamic Network trajectory adjustment.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_options()
    for command in COMMANDS:
        sub = subparsers.add_parser(command.name, help=command.help, parents=[common])
        command.add_arguments(sub)
        sub.set_defaults(handler=command)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    run = given(out_dir=args.out_dir, threads=args.threads, seed=args.seed)
    overrides = {"run": run} if run else {}
    for section, values in args.handler.overrides(args).items():
        overrides.setdefault(section, {}).update(values)
    return overrides


def main(argv: Optional[list[str]] = None) -> int:
    """Run one subcommand.

    Returns:
        0 on success, 1 when a stage fails, 2 on an invalid configuration.
    """
    setup_logging()
    args = build_parser().parse_args(argv)
    try:
        config = parse_config(args.config, _overrides(args))
    except RunConfigInvalidError as e:
        logger.error("%s", e.msg)
        return EXIT_CONFIG_INVALID
    context = RunContext(config)
    try:
        args.handler(context).run(args)
    except OutputPathError as e:
        logger.error("%s", e)
        return EXIT_CONFIG_INVALID
    except StageError as e:
        if isinstance(e.cause, OutputPathError):
            logger.error("%s", e.cause)
            return EXIT_CONFIG_INVALID
        logger.error("Stage %s failed: %s", e.stage, e.cause)
        return EXIT_STAGE_FAILED
    except (ValueError, OSError) as e:
        logger.error("Stage %s failed: %s", args.command, e)
        return EXIT_STAGE_FAILED
    return EXIT_OK


if __name__ == "__main__":  # pragma: nocover
    sys.exit(main())
