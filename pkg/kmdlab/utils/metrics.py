"""
Prometheus metrics for sweep runs.

A private registry keeps kmdlab's collectors separate from the default
process registry; the CLI dumps it with ``--metrics-out``.
"""

import logging
from pathlib import Path

import prometheus_client

from kmdlab.core.exceptions import ExportError

logger = logging.getLogger(__name__)

registry = prometheus_client.CollectorRegistry()

MEMBERS_TOTAL = prometheus_client.Counter(
    'kmdlab_members_total',
    'Ensemble members evaluated',
    ['status'],
    registry=registry
)
MEMBER_DURATION = prometheus_client.Histogram(
    'kmdlab_member_duration_seconds',
    'Wall time of one ensemble member',
    buckets=(0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 30.0),
    registry=registry
)
FITS_TOTAL = prometheus_client.Counter(
    'kmdlab_fits_total',
    'Companion DMD fits performed',
    ['kind'],
    registry=registry
)
MEMBERS_IN_FLIGHT = prometheus_client.Gauge(
    'kmdlab_members_in_flight',
    'Ensemble members currently running',
    registry=registry
)


def write_metrics(path: Path) -> Path:
    """Write the registry in text exposition format."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        prometheus_client.write_to_textfile(str(path), registry)
    except OSError as e:
        raise ExportError(str(path), str(e))
    logger.info(f"Metrics written to {path}")
    return path
