"""
Companion-matrix DMD.

Given snapshots Z = [X, z_{n+1}], the model is the minimum-norm
``c* = X† z_{n+1}``. The companion matrix T[c*] factors as ``W⁻¹ Λ W`` with W
the Vandermonde matrix of its eigenvalues, so the DMD modes ``D* = X W⁻¹``
reproduce the data as ``Y = D* Λ W + r* e_nᵀ``.
"""

import logging
from typing import Optional

import numpy as np
import scipy.linalg

from kmdlab.core.exceptions import DegenerateSpectrumError, DimensionMismatchError
from kmdlab.linalg.kernel import (
    Tolerance,
    as_cmatrix,
    companion_from,
    min_norm_lstsq,
    min_pairwise_distance,
    numerical_rank,
    spectral_order,
    vandermonde,
)
from kmdlab.models.domain import DmdModel, PipelineDescriptor, TimeSeries
from kmdlab.models.responses import FitReport, to_pairs
from kmdlab.services.preprocess import classify_regime
from kmdlab.utils.metrics import FITS_TOTAL

logger = logging.getLogger(__name__)

DEFAULT_SEPARATION_TOL = 1e-6


def companion_eigensystem(c: np.ndarray, separation_tol: float = DEFAULT_SEPARATION_TOL):
    """
    Eigenvalues and Vandermonde-normalized eigenvectors of T[c].

    Column j of the returned eigenvector matrix satisfies
    ``gp_n[λ_j]ᵀ v_j = 1``, so the matrix is the inverse of the Vandermonde
    matrix of the eigenvalues. Below ``separation_tol`` the eigenvectors are
    left unit-norm and ``degenerate`` is set.

    Returns:
        (eigenvalues, eigenvectors, degenerate, min_separation), in spectral order
    """
    T = companion_from(c)
    n = T.shape[0]
    eigenvalues, U = scipy.linalg.eig(T, check_finite=False)
    order = spectral_order(eigenvalues)
    eigenvalues, U = eigenvalues[order], U[:, order]

    separation = min_pairwise_distance(eigenvalues)
    if separation < separation_tol:
        logger.warning(
            f"Companion spectrum of order {n} is degenerate "
            f"(min separation {separation:.3e} < {separation_tol:.1e}); using unit-norm eigenvectors"
        )
        return eigenvalues, U / np.linalg.norm(U, axis=0), True, separation

    W = vandermonde(eigenvalues, n)
    # Row j of W times column j of U; plain transpose, no conjugation
    scale = np.einsum("ji,ij->j", W, U)
    return eigenvalues, U / scale, False, separation


def _fit(
    X: np.ndarray,
    z_next: np.ndarray,
    pipeline: PipelineDescriptor,
    tol: Tolerance,
    separation_tol: float,
    kind: str,
) -> DmdModel:
    c_star = min_norm_lstsq(X, z_next, tol)
    residual = z_next - X @ c_star
    eigenvalues, V, degenerate, separation = companion_eigensystem(c_star, separation_tol)
    FITS_TOTAL.labels(kind=kind).inc()

    logger.debug(
        f"Fitted {kind} companion model: θ={c_star.size}, m={X.shape[0]}, "
        f"pipeline={pipeline.describe()}, residual={np.linalg.norm(residual):.3e}"
    )
    return DmdModel(
        c_star=c_star,
        residual=residual,
        eigenvalues=eigenvalues,
        modes=X @ V,
        eigenvectors=V,
        pipeline=pipeline,
        degenerate=degenerate,
        min_separation=separation,
    )


def fit_companion(
    Z: TimeSeries,
    tol: Tolerance = None,
    separation_tol: float = DEFAULT_SEPARATION_TOL,
    kind: str = "plain",
) -> DmdModel:
    """
    Fit companion DMD to a series.

    Args:
        Z: Snapshots, n+1 >= 2 columns
        tol: Relative SVD cutoff for X† (default 1e-8)
        separation_tol: Eigenvalue separation below which modes are not
            Vandermonde-normalized
        kind: Metrics label of the fit variant

    Returns:
        DmdModel with eigenvalues in descending modulus, ascending phase
    """
    return _fit(Z.X, Z.last, Z.pipeline, tol, separation_tol, kind)


def reconstruct(model: DmdModel, X: np.ndarray) -> np.ndarray:
    """
    Model reproduction of Y from X: ``D Λ W + r e_nᵀ`` with ``D = X W⁻¹``.

    Raises:
        DegenerateSpectrumError: Modes are not Vandermonde-normalized
    """
    if model.degenerate:
        raise DegenerateSpectrumError(model.min_separation, DEFAULT_SEPARATION_TOL)
    X = as_cmatrix(X, "X")
    n = model.companion_order
    if X.shape[1] != n:
        raise DimensionMismatchError("reconstruct", f"X with {n} columns", X.shape)
    if X.shape[0] != model.residual.size:
        raise DimensionMismatchError("reconstruct", f"X with {model.residual.size} rows", X.shape)

    D = X @ model.eigenvectors
    W = vandermonde(model.eigenvalues, n)
    Y = (D * model.eigenvalues[None, :]) @ W
    Y[:, -1] += model.residual
    return Y


def forecast(model: DmdModel, X_test: np.ndarray) -> np.ndarray:
    """One-step prediction ``X_test c*`` of the snapshot following X_test."""
    X_test = as_cmatrix(X_test, "X_test")
    if X_test.shape[1] != model.companion_order:
        raise DimensionMismatchError(
            "forecast", f"X_test with {model.companion_order} columns", X_test.shape
        )
    return X_test @ model.c_star


def is_linearly_consistent(Z: TimeSeries, tol: Tolerance = None) -> bool:
    """Whether some linear map sends X to Y, tested as rank([X; Y]) == rank(X)."""
    stacked = np.vstack([Z.X, Z.Y])
    return numerical_rank(stacked, tol) == numerical_rank(Z.X, tol)


def dft_spectrum(theta: int) -> np.ndarray:
    """Spectrum of T[-1_θ]: the (θ+1)-th roots of unity other than 1."""
    k = np.arange(1, theta + 1)
    roots = np.exp(2j * np.pi * k / (theta + 1))
    return roots[spectral_order(roots)]


def fit_report(
    model: DmdModel,
    Z: Optional[TimeSeries] = None,
    r: Optional[int] = None,
    kept: Optional[np.ndarray] = None,
) -> FitReport:
    """JSON-ready summary of a fit, with consistency and regime when known."""
    separation = model.min_separation if np.isfinite(model.min_separation) else None
    return FitReport(
        theta=model.companion_order,
        delays=model.pipeline.delays,
        pipeline=model.pipeline.describe(),
        c_star=to_pairs(model.c_star),
        residual_norm=model.residual_norm,
        eigenvalues=to_pairs(model.eigenvalues),
        mode_norms=[float(v) for v in model.mode_norms],
        degenerate=model.degenerate,
        min_separation=separation,
        linearly_consistent=is_linearly_consistent(Z) if Z is not None else None,
        regime=classify_regime(model.companion_order, r).tag if r else None,
        kept=to_pairs(kept) if kept is not None else None,
    )
