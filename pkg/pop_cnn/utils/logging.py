"""
Logging helpers

Loggers write to stderr so that command output on stdout stays machine readable.
"""

import logging
import sys
from typing import Optional

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_configured = False


def configure_logging(verbose: bool = False) -> None:
    """Install a single stderr handler on the package root logger"""
    global _configured

    root = logging.getLogger("pop_cnn")
    root.setLevel(logging.DEBUG if verbose else logging.INFO)

    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
        root.propagate = False
        _configured = True


def get_logger(name: str) -> logging.Logger:
    """Return a logger below the package namespace"""
    if not name.startswith("pop_cnn"):
        name = "pop_cnn." + name
    return logging.getLogger(name)


def log_error(title: str, message: str, logger: Optional[logging.Logger] = None) -> None:
    """
    Log a titled error

    Args:
        title: Short label of the failed job (e.g. "Training Failed")
        message: Details, usually ``str(exc)``
        logger: Logger to use, defaults to the package logger
    """
    (logger or get_logger("pop_cnn")).error("%s: %s", title, message)
