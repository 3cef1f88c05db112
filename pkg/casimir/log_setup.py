"""Logging configuration for the command line."""

from __future__ import annotations

import logging
import sys

import coloredlogs

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"


def setup_logging(level: str | int = "INFO") -> None:
    """Install a coloured stderr handler on the root logger.

    stdout stays free for CSV and JSON records.
    """
    if isinstance(level, str):
        level = level.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"unknown log level {level!r}")
    coloredlogs.install(level=level, fmt=LOG_FORMAT, stream=sys.stderr)
