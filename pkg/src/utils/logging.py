"""
Logging setup for the Direction Set Toolkit.

Records go to stderr (stdout is reserved for command results), optionally
mirrored to a file. Kernels time themselves with `log_duration`, which logs at
DEBUG only.
"""

import logging
import os
import sys
import time
from contextlib import contextmanager
from typing import Iterator, List, Optional, TextIO, Union

from ..config import DEV_MODE, LOG_LEVEL

PACKAGE_LOGGER = "src"

# Default log format
DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Development log format (adds the call site)
DEV_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s"


def resolve_level(level: Optional[Union[int, str]]) -> int:
    """Numeric level for a name or number; unknown names fall back to INFO."""
    if level is None:
        level = LOG_LEVEL
    if isinstance(level, str):
        return getattr(logging, level.upper(), logging.INFO)
    return int(level)


def _handlers(stream: TextIO, log_file: Optional[str]) -> List[logging.Handler]:
    handlers: List[logging.Handler] = [logging.StreamHandler(stream)]
    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir)
        handlers.append(logging.FileHandler(log_file))
    return handlers


def configure_logging(
    level: Optional[Union[int, str]] = None,
    format_string: Optional[str] = None,
    log_file: Optional[str] = None,
    stream: Optional[TextIO] = None,
) -> None:
    """
    Install stderr (and optional file) handlers on the root logger.

    Args:
        level: Level name or number (default: DIRSET_LOG_LEVEL).
        format_string: Record format (default: DEV_FORMAT when DEV_MODE is set).
        log_file: Also write records to this file, creating its directory.
        stream: Stream for the console handler (default: sys.stderr).
    """
    numeric = resolve_level(level)
    formatter = logging.Formatter(format_string or (DEV_FORMAT if DEV_MODE else DEFAULT_FORMAT))

    root_logger = logging.getLogger()
    root_logger.setLevel(numeric)
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
    for handler in _handlers(stream if stream is not None else sys.stderr, log_file):
        handler.setFormatter(formatter)
        root_logger.addHandler(handler)

    package_logger = logging.getLogger(PACKAGE_LOGGER)
    package_logger.setLevel(numeric)
    package_logger.debug(f"Logging configured with level: {logging.getLevelName(numeric)}")
    if log_file:
        package_logger.info(f"Logging to file: {log_file}")


def get_logger(name: str) -> logging.Logger:
    """Logger for a module; pass __name__."""
    return logging.getLogger(name)


@contextmanager
def log_duration(logger: logging.Logger, what: str) -> Iterator[None]:
    """Log the wall time of the enclosed block at DEBUG."""
    if not logger.isEnabledFor(logging.DEBUG):
        yield
        return
    start = time.perf_counter()
    try:
        yield
    finally:
        logger.debug(f"{what} took {time.perf_counter() - start:.3f} s")
