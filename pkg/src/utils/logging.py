"""
Logging setup shared by the CLI and scripts.
"""

import sys

from loguru import logger

LOG_FORMAT = "<level>{level: <8}</level> | {name}:{function} - {message}"


def configure_logging(level: str = "WARNING") -> None:
    """Route loguru output to stderr at ``level``; stdout stays for reports."""
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format=LOG_FORMAT, colorize=False)
