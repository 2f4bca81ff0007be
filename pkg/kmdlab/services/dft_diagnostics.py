"""
Mean-subtracted DMD and its equivalence with the temporal DFT.

After centring, the minimum-norm companion coefficients satisfy
``c_ms + 1 = P_N(X_ms) 1``. Mean-subtracted DMD collapses onto the DFT
exactly when that projection vanishes, and ``||c_ms + 1|| / sqrt(θ)`` (the
relative distance to DFT) always lies in [0, 1].
"""

import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from kmdlab.core.exceptions import (
    CenteringError,
    EmptyInputError,
    InsufficientSnapshotsError,
    InvalidParameterError,
)
from kmdlab.linalg.kernel import Tolerance, nullspace_projection, ones
from kmdlab.models.domain import DmdModel, TimeSeries
from kmdlab.models.responses import CellStats, DftDistanceReport, SufficiencyReport, to_pairs
from kmdlab.services.dmd_engine import DEFAULT_SEPARATION_TOL, fit_companion
from kmdlab.services.preprocess import delay_then_ms, is_centred

logger = logging.getLogger(__name__)

DEFAULT_DECISION_TOL = 1e-6
CENTRING_TOL = 1e-8
JUMP_FACTOR = 100.0
JUMP_FLOOR = 1e-12


def relative_distance_to_dft(c_ms: np.ndarray) -> float:
    """``||c_ms + 1_θ|| / sqrt(θ)``."""
    theta = c_ms.size
    return float(np.linalg.norm(c_ms + 1.0)) / np.sqrt(theta)


def fit_mean_subtracted(
    Z: TimeSeries,
    d: int = 0,
    tol: Tolerance = None,
    decision_tol: float = DEFAULT_DECISION_TOL,
    separation_tol: float = DEFAULT_SEPARATION_TOL,
) -> Tuple[DmdModel, DftDistanceReport]:
    """
    Companion DMD on the delayed, then centred, series.

    The temporal mean removed is the one of the delayed series, not the
    delayed copy of the original mean.

    Returns:
        (model, distance report)
    """
    Z_pipeline = delay_then_ms(Z, d)
    model = fit_companion(Z_pipeline, tol, separation_tol, kind="mean_subtracted")
    distance = relative_distance_to_dft(model.c_star)

    report = DftDistanceReport(
        theta=model.companion_order,
        d=d,
        distance=distance,
        c_ms=to_pairs(model.c_star),
        equivalent=distance < decision_tol,
        decision_tol=decision_tol,
    )
    logger.debug(f"DFT distance at θ={report.theta}, d={d}: {distance:.3e}")
    return model, report


def equivalence_via_projection(
    Z_pipeline: TimeSeries,
    tol: Tolerance = None,
    decision_tol: float = DEFAULT_DECISION_TOL,
    centring_tol: float = CENTRING_TOL,
) -> bool:
    """
    DFT equivalence decided by ``||P_N(X_ms) 1|| / sqrt(θ) < decision_tol``.

    Args:
        Z_pipeline: An already centred series (output of a mean-subtracting pipeline)

    Raises:
        CenteringError: Z_pipeline has a non-negligible temporal mean
    """
    centred, relative_mean = is_centred(Z_pipeline, centring_tol)
    if not centred:
        logger.warning(f"Rejected uncentred input (relative mean {relative_mean:.3e})")
        raise CenteringError(relative_mean, centring_tol)

    theta = Z_pipeline.theta
    projection = nullspace_projection(Z_pipeline.X, ones(theta), tol)
    return float(np.linalg.norm(projection)) / np.sqrt(theta) < decision_tol


def detect_jump(
    medians: Sequence[Tuple[int, float]],
    jump_factor: float = JUMP_FACTOR,
    floor: float = JUMP_FLOOR,
) -> Optional[int]:
    """
    First θ whose median exceeds jump_factor times every earlier median.

    Args:
        medians: (θ, median) pairs in increasing θ
    """
    if jump_factor <= 1.0:
        raise InvalidParameterError("jump_factor", jump_factor, "must exceed 1")
    running_max = None
    for theta, median in medians:
        if running_max is not None and median > jump_factor * max(running_max, floor):
            return theta
        running_max = median if running_max is None else max(running_max, median)
    return None


def sufficiency_scan(
    Z: Union[TimeSeries, Sequence[TimeSeries]],
    r_max: int,
    theta_range: Sequence[int],
    tol: Tolerance = None,
    decision_tol: float = DEFAULT_DECISION_TOL,
    jump_factor: float = JUMP_FACTOR,
    jump_floor: float = JUMP_FLOOR,
) -> SufficiencyReport:
    """
    Scan the relative distance to DFT over θ at d = r_max - 1.

    A jump in the median distance at θ marks where mean-subtracted DMD stops
    being equivalent to the DFT. When no jump happens through θ = r_max + 1
    the data carry no invariant subspace of dimension ≤ r_max, so
    ``lower_bound_on_r`` is r_max + 1.

    Args:
        Z: One trajectory or an ensemble of trajectories
        r_max: Largest system order assumed
        theta_range: Companion orders to scan

    Raises:
        InsufficientSnapshotsError: A trajectory is shorter than θ_max + r_max
    """
    if r_max < 1:
        raise InvalidParameterError("r_max", r_max, "must be at least 1")
    thetas: List[int] = sorted(set(int(t) for t in theta_range))
    if not thetas:
        raise EmptyInputError("theta_range")
    if thetas[0] < 1:
        raise InvalidParameterError("theta_range", thetas[0], "companion orders must be at least 1")

    ensemble = [Z] if isinstance(Z, TimeSeries) else list(Z)
    if not ensemble:
        raise EmptyInputError("trajectory ensemble")

    d = r_max - 1
    needed = thetas[-1] + d + 1
    for member in ensemble:
        if member.num_snapshots < needed:
            raise InsufficientSnapshotsError(
                needed, member.num_snapshots, f"θ={thetas[-1]} with d={d} delays"
            )

    logger.info(
        f"Sufficiency scan: r_max={r_max}, d={d}, θ∈[{thetas[0]}, {thetas[-1]}], "
        f"{len(ensemble)} trajectories"
    )

    distances = {}
    for theta in thetas:
        samples = [
            fit_mean_subtracted(member.window(0, theta + d + 1), d, tol, decision_tol)[1].distance
            for member in ensemble
        ]
        distances[theta] = CellStats.from_samples(theta, d, samples)

    jump = detect_jump([(t, distances[t].median) for t in thetas], jump_factor, jump_floor)

    lower_bound = None
    if thetas[-1] >= r_max + 1 and (jump is None or jump > r_max + 1):
        lower_bound = r_max + 1

    if jump is not None:
        logger.info(f"Distance jump at θ={jump}")
    else:
        logger.info(f"No jump through θ={thetas[-1]}; lower bound on r: {lower_bound}")

    return SufficiencyReport(
        r_max_assumed=r_max,
        delays=d,
        distances=distances,
        jump_location=jump,
        lower_bound_on_r=lower_bound,
    )
