#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Utilities for logging."""

import logging
import os
import sys
from logging import Logger, getLogger

from constants import LOG_ENV_VAR, LOG_FORMAT

_HANDLER_NAME = "kinscan-stderr"


class WithLogging:
    """Base class to be used for providing a logger embedded in the class."""

    @property
    def logger(self) -> Logger:
        """Create logger.

        Returns:
            Logger: default logger for this class.
        """
        name_logger = str(self.__class__).replace("<class '", "").replace("'>", "")
        return getLogger(name_logger)


def level_from_env(default: int = logging.INFO) -> int:
    """Return the log level requested through the environment.

    Args:
        default: level used when the variable is unset or unknown.

    Returns:
        A numeric logging level.
    """
    value = os.environ.get(LOG_ENV_VAR, "").strip().upper()
    if not value:
        return default
    level = logging.getLevelName(value)
    if isinstance(level, int):
        return level
    getLogger(__name__).warning("Unknown %s value %r, using INFO", LOG_ENV_VAR, value)
    return default


def setup_logging() -> Logger:
    """Install the stderr handler on the root logger.

    Calling it twice keeps a single handler; the level is refreshed from the environment.

    Returns:
        The configured root logger.
    """
    root = getLogger()
    handler = next((h for h in root.handlers if h.get_name() == _HANDLER_NAME), None)
    if handler is None:
        handler = logging.StreamHandler(sys.stderr)
        handler.set_name(_HANDLER_NAME)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
    root.setLevel(level_from_env())
    return root
