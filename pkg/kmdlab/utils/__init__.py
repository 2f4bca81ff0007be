"""Utility functions and helpers."""

from kmdlab.utils.logger import configure_logging, get_logger
from kmdlab.utils.metrics import write_metrics

__all__ = [
    "configure_logging",
    "get_logger",
    "write_metrics",
]
