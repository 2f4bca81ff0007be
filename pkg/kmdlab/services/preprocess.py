"""
Mean subtraction and delay embedding.

Both operations return new TimeSeries whose pipeline descriptor records the
step and the resulting companion order θ (column count minus one).
"""

import logging
from typing import Tuple

import numpy as np

from kmdlab.core.exceptions import InsufficientSnapshotsError, InvalidParameterError
from kmdlab.models.domain import Delay, MeanSubtract, SamplingRegime, TimeSeries
from kmdlab.models.enums import RegimeTag

logger = logging.getLogger(__name__)


def mean_subtract(Z: TimeSeries) -> Tuple[TimeSeries, np.ndarray]:
    """
    Remove the temporal mean from every snapshot.

    Returns:
        (Z_ms, μ) where μ is the mean of the columns of Z
    """
    mu = Z.data.mean(axis=1)
    return Z.derive(Z.data - mu[:, None], MeanSubtract()), mu


def delay_embed(Z: TimeSeries, d: int) -> TimeSeries:
    """
    Stack d time-shifted copies of Z below it.

    Block row k (0-based) holds snapshots z_{1+k} … z_{n+1-d+k}; the earliest
    snapshots sit in the top block. The result has m(d+1) rows and n+1-d
    columns.
    """
    if d < 0:
        raise InvalidParameterError("d", d, "must be non-negative")
    width = Z.num_snapshots - d
    if width < 2:
        raise InsufficientSnapshotsError(
            d + 2, Z.num_snapshots, f"{d} delays leave fewer than 2 columns"
        )
    if d == 0:
        return Z.derive(Z.data, Delay(0))

    blocks = [Z.data[:, k:k + width] for k in range(d + 1)]
    return Z.derive(np.vstack(blocks), Delay(d))


def ms_then_delay(Z: TimeSeries, d: int) -> TimeSeries:
    """Centre first, then delay: (Z_ms)_{d-delayed}."""
    # Width check before centring so the error names the original series
    if Z.num_snapshots - d < 2:
        raise InsufficientSnapshotsError(d + 2, Z.num_snapshots, f"{d} delays leave fewer than 2 columns")
    Z_ms, _ = mean_subtract(Z)
    return delay_embed(Z_ms, d)


def delay_then_ms(Z: TimeSeries, d: int) -> TimeSeries:
    """Delay first, then remove the mean of the delayed series: (Z_{d-delayed})_ms."""
    Z_ms, _ = mean_subtract(delay_embed(Z, d))
    return Z_ms


def classify_regime(theta: int, r: int) -> SamplingRegime:
    """Place companion order θ against system order r."""
    if theta < 1:
        raise InvalidParameterError("theta", theta, "must be at least 1")
    if r < 1:
        raise InvalidParameterError("r", r, "must be at least 1")

    if theta < r:
        tag = RegimeTag.UNDER_SAMPLED
    elif theta == r:
        tag = RegimeTag.JUST_SAMPLED
    else:
        tag = RegimeTag.OVER_SAMPLED
    return SamplingRegime(tag=tag, theta=theta, r=r)


def is_centred(Z: TimeSeries, rel_tol: float = 1e-8) -> Tuple[bool, float]:
    """
    Whether the temporal mean of Z is negligible.

    Returns:
        (centred, relative mean) with the mean measured against the largest
        column norm
    """
    scale = float(np.max(np.linalg.norm(Z.data, axis=0)))
    if scale == 0.0:
        return True, 0.0
    relative = float(np.linalg.norm(Z.data.mean(axis=1))) / scale
    return relative <= rel_tol, relative
