"""Logging setup shared by the CLI and long Monte Carlo runs."""

import logging
import sys


def setup_logging(level: str, verbose: bool = False, quiet: bool = False) -> logging.Logger:
    """Configure logging with the specified level.

    Args:
        level: Base level name from configuration (e.g. "WARNING").
        verbose: Lower the level to INFO (per-test suite lines).
        quiet: Raise the level to ERROR.

    Returns:
        The package logger.
    """
    log_level = getattr(logging, level.upper(), logging.WARNING)
    if verbose:
        log_level = min(log_level, logging.INFO)
    if quiet:
        log_level = logging.ERROR

    logging.basicConfig(
        level=log_level,
        format="%(asctime)s %(levelname)-5s %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
        force=True,
    )

    logger = logging.getLogger("pdcoag")
    logger.setLevel(log_level)
    return logger
