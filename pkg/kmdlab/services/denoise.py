"""
Noise injection and noise-robust companion DMD.

Two variants are provided: TLS companion DMD, which fits the best low-rank
approximation of the noisy snapshots, and noise-resistant companion DMD, which
pre-multiplies the delayed noisy data by the conjugate transpose of a delayed
filter window from the same trajectory. Noise in the two windows is
independent, so the cross product averages it out.
"""

import logging

import numpy as np

from kmdlab.core.exceptions import DimensionMismatchError, InvalidParameterError
from kmdlab.linalg.kernel import Tolerance, best_rank_approximation
from kmdlab.models.domain import DmdModel, TimeSeries
from kmdlab.models.requests import NoiseSpec
from kmdlab.services.dmd_engine import DEFAULT_SEPARATION_TOL, fit_companion
from kmdlab.services.preprocess import delay_embed

logger = logging.getLogger(__name__)


def noise_matrix(shape, spec: NoiseSpec, complex_valued: bool) -> np.ndarray:
    """
    Zero-mean uniform noise with standard deviation spec.std_dev.

    Complex noise has independent real and imaginary parts, each with
    standard deviation σ/√2.
    """
    rng = np.random.default_rng(spec.seed)
    if not complex_valued:
        half_width = spec.std_dev * np.sqrt(3.0)
        return rng.uniform(-half_width, half_width, size=shape)

    half_width = spec.std_dev * np.sqrt(3.0) / np.sqrt(2.0)
    real = rng.uniform(-half_width, half_width, size=shape)
    imag = rng.uniform(-half_width, half_width, size=shape)
    return real + 1j * imag


def add_noise(Z: TimeSeries, spec: NoiseSpec) -> TimeSeries:
    """Add independent element-wise noise to Z; deterministic for a fixed seed."""
    if spec.std_dev == 0.0:
        return Z
    complex_valued = bool(np.any(Z.data.imag != 0.0))
    noisy = Z.data + noise_matrix(Z.data.shape, spec, complex_valued)
    return TimeSeries(noisy, label=Z.label, pipeline=Z.pipeline)


def tls_series(Z_noisy: TimeSeries, rank: int) -> TimeSeries:
    """Best rank-``rank`` approximation of Z_noisy."""
    limit = min(Z_noisy.data.shape)
    if rank < 1 or rank > limit:
        raise InvalidParameterError("rank", rank, f"must lie in [1, {limit}]")

    return TimeSeries(
        best_rank_approximation(Z_noisy.data, rank),
        label=Z_noisy.label,
        pipeline=Z_noisy.pipeline,
    )


def tls_companion(
    Z_noisy: TimeSeries,
    rank: int,
    tol: Tolerance = None,
    separation_tol: float = DEFAULT_SEPARATION_TOL,
) -> DmdModel:
    """Companion DMD on the best rank-``rank`` approximation of Z_noisy."""
    return fit_companion(tls_series(Z_noisy, rank), tol, separation_tol, kind="tls")


def noise_resistant_series(Z_noisy: TimeSeries, Z_filter: TimeSeries, d: int) -> TimeSeries:
    """
    The filtered series ``(Z_filter)_d^H (Z_noisy)_d / (d+1)``.

    Z_filter must come from the same trajectory without overlapping
    Z_noisy in time; the caller is responsible for that.

    Raises:
        DimensionMismatchError: The two series have different observable counts
    """
    if Z_filter.num_observables != Z_noisy.num_observables:
        raise DimensionMismatchError(
            "noise_resistant_companion",
            f"filter with {Z_noisy.num_observables} observables",
            Z_filter.num_observables,
        )

    noisy_delayed = delay_embed(Z_noisy, d)
    filter_delayed = delay_embed(Z_filter, d)
    projected = filter_delayed.data.conj().T @ noisy_delayed.data / (d + 1)

    logger.debug(
        f"Noise-resistant fit: d={d}, filter width {filter_delayed.num_snapshots}, "
        f"θ={noisy_delayed.theta}"
    )
    return TimeSeries(projected, label=Z_noisy.label, pipeline=noisy_delayed.pipeline)


def noise_resistant_companion(
    Z_noisy: TimeSeries,
    Z_filter: TimeSeries,
    d: int,
    tol: Tolerance = None,
    separation_tol: float = DEFAULT_SEPARATION_TOL,
) -> DmdModel:
    """Companion DMD on the filtered series of :func:`noise_resistant_series`."""
    return fit_companion(
        noise_resistant_series(Z_noisy, Z_filter, d), tol, separation_tol, kind="noise_resistant"
    )
