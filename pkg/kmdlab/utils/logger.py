"""
Logging setup for kmdlab.

Console output is coloured on terminals; a rotating file log is added when a
log directory is configured.
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Optional

PLAIN_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"
FILE_FORMAT = (
    "%(asctime)s - %(levelname)s - %(name)s - %(message)s "
    "[%(filename)s:%(lineno)d] [%(threadName)s]"
)
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class LogColors:
    """ANSI color codes for log levels."""
    RESET = "\033[0m"
    DEBUG = "\033[36m"  # Cyan
    INFO = "\033[32m"   # Green
    WARNING = "\033[33m"  # Yellow
    ERROR = "\033[31m"  # Red
    CRITICAL = "\033[35m"  # Magenta


class ColoredFormatter(logging.Formatter):
    """Level-coloured formatter; source location only for non-INFO records."""

    _COLORS = {
        logging.DEBUG: LogColors.DEBUG,
        logging.INFO: LogColors.INFO,
        logging.WARNING: LogColors.WARNING,
        logging.ERROR: LogColors.ERROR,
        logging.CRITICAL: LogColors.CRITICAL,
    }

    def format(self, record: logging.LogRecord) -> str:
        color = self._COLORS.get(record.levelno, LogColors.RESET)
        fmt = f"%(asctime)s - {color}%(levelname)s{LogColors.RESET} - %(name)s - %(message)s"
        if record.levelno != logging.INFO:
            fmt += " [%(filename)s:%(lineno)d]"
        return logging.Formatter(fmt=fmt, datefmt=DATE_FORMAT).format(record)


def configure_logging(
    log_level: str = "INFO",
    log_dir: Optional[Path] = None,
    use_colors: bool = True,
    max_bytes: int = 10485760,
    backup_count: int = 3,
) -> None:
    """
    Configure process-wide logging.

    Log records go to stderr so that CLI output written to stdout (JSON
    reports, CSV) stays machine-readable.

    Args:
        log_level: Log level name
        log_dir: Directory for ``kmdlab.log`` (None for console only)
        use_colors: Colour console output when attached to a terminal
        max_bytes: Rotation size of the file log
        backup_count: Number of rotated files kept
    """
    level = getattr(logging, log_level.upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    if use_colors and sys.stderr.isatty():
        console_handler.setFormatter(ColoredFormatter())
    else:
        console_handler.setFormatter(logging.Formatter(fmt=PLAIN_FORMAT, datefmt=DATE_FORMAT))
    root_logger.addHandler(console_handler)

    if log_dir:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)

        file_handler = logging.handlers.RotatingFileHandler(
            filename=log_dir / "kmdlab.log",
            maxBytes=max_bytes,
            backupCount=backup_count,
            encoding="utf-8",
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(fmt=FILE_FORMAT, datefmt=DATE_FORMAT))
        root_logger.addHandler(file_handler)

    # Silence noisy third-party loggers
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    logging.getLogger("PIL").setLevel(logging.WARNING)


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance for a module (typically ``__name__``)."""
    return logging.getLogger(name)
