"""
Mode-norm pruning and KMD-Quality.

A companion model's eigenvalues whose Vandermonde-normalized modes have
non-negligible norm form the pruned spectrum σ_nontriv. KMD-Quality scores how
well that spectrum matches a target set B:

    quality = 1 - max(1 - 10^(-ρ_subset), δ_trivial)

where ρ_subset measures how far B is from being contained in the model
spectrum and δ_trivial is the share of squared mode norm left outside B once
the model is moved to the closest companion whose spectrum contains B.

Polynomial coefficient vectors follow the companion convention: c is the
coefficient vector of ``c_1 + c_2 z + … + c_n z^(n-1) - z^n`` (leading
coefficient -1). For B = {2, 3}, (z-2)(z-3) = z² - 5z + 6 gives c = [-6, 5].
"""

import logging
from typing import Union

import numpy as np
import scipy.linalg

from kmdlab.core.exceptions import (
    DegenerateSpectrumError,
    DimensionMismatchError,
    EigenMatchingError,
    InvalidParameterError,
)
from kmdlab.linalg.kernel import (
    as_cvector,
    companion_from,
    convolution_matrix,
    monic_from_roots,
    vandermonde,
)
from kmdlab.models.domain import (
    DmdModel,
    LtiSystem,
    MsubCase,
    MsubEfficacy,
    PrunedSpectrum,
    SpectrumSet,
    TimeSeries,
)
from kmdlab.models.enums import KmdTarget
from kmdlab.models.responses import KmdQualityReport, to_pairs
from kmdlab.services.dmd_engine import DEFAULT_SEPARATION_TOL, companion_eigensystem

logger = logging.getLogger(__name__)

DEFAULT_NORM_THRESHOLD_REL = 1e-8
DEFAULT_MATCH_TOL = 1e-6
ROOT_OF_UNITY_TOL = 1e-9
DEFAULT_P_MAX = 64

SpectrumLike = Union[SpectrumSet, np.ndarray, list]


def _as_spectrum(values: SpectrumLike, name: str) -> SpectrumSet:
    spectrum = values if isinstance(values, SpectrumSet) else SpectrumSet(values)
    return spectrum.require_nonempty(name)


def _mode_norms(X: np.ndarray, eigenvectors: np.ndarray) -> np.ndarray:
    return np.linalg.norm(X @ eigenvectors, axis=0)


def sigma_nontriv(
    model: DmdModel,
    Z_used: TimeSeries,
    norm_threshold_rel: float = DEFAULT_NORM_THRESHOLD_REL,
) -> PrunedSpectrum:
    """
    Split the model spectrum by mode norm.

    An eigenvalue is kept when its mode norm exceeds norm_threshold_rel times
    the largest mode norm.

    Raises:
        DegenerateSpectrumError: Mode norms are ill-defined for the model
    """
    if model.degenerate:
        raise DegenerateSpectrumError(model.min_separation, DEFAULT_SEPARATION_TOL)
    if Z_used.theta != model.companion_order:
        raise DimensionMismatchError(
            "sigma_nontriv", f"series with θ={model.companion_order}", f"θ={Z_used.theta}"
        )
    if not 0.0 <= norm_threshold_rel < 1.0:
        raise InvalidParameterError("norm_threshold_rel", norm_threshold_rel, "must lie in [0, 1)")

    norms = _mode_norms(Z_used.X, model.eigenvectors)
    threshold = norm_threshold_rel * float(norms.max()) if norms.size else 0.0
    keep = norms > threshold

    logger.debug(
        f"Pruned spectrum: kept {int(keep.sum())} of {norms.size} eigenvalues "
        f"(threshold {threshold:.3e})"
    )
    return PrunedSpectrum(
        kept=SpectrumSet(model.eigenvalues[keep], 0.0),
        discarded=SpectrumSet(model.eigenvalues[~keep], 0.0),
        mode_norms={i: float(v) for i, v in enumerate(norms)},
        norm_threshold=threshold,
    )


def rho_subset(B1: SpectrumLike, B2: SpectrumLike) -> float:
    """``max_{b1 ∈ B1} min_{b2 ∈ B2} |b1 - b2|``: zero iff B1 ⊆ B2."""
    v1 = _as_spectrum(B1, "B1").values
    v2 = _as_spectrum(B2, "B2").values
    return float(np.abs(v1[:, None] - v2[None, :]).min(axis=1).max())


def closest_superset_companion(B: SpectrumLike, c) -> np.ndarray:
    """
    Closest coefficient vector γ to c whose companion spectrum contains B.

    The monic characteristic polynomial ``z^n - γ_n z^(n-1) - … - γ_1`` is
    written as the root polynomial b of B times a free monic factor a of
    degree q = n - #B. Its lower n coefficients are linear in a, so
    minimizing ||c - γ|| is a linear least-squares problem in a.

    Raises:
        DimensionMismatchError: #B > #c
    """
    B = _as_spectrum(B, "B")
    c = as_cvector(c, "c")
    n, p = c.size, len(B)
    if p > n:
        raise DimensionMismatchError("closest_superset_companion", f"#B <= {n}", p)

    b = monic_from_roots(B.values)
    q = n - p

    # Fixed part: b's non-leading coefficients shifted up by the free degree
    s = np.zeros(n, dtype=np.complex128)
    s[q:] = b[:p]
    if q == 0:
        return -s

    M = convolution_matrix(b, q)[:n, :]
    a, *_ = scipy.linalg.lstsq(M, -c - s, check_finite=False)
    return -(M @ a + s)


def delta_trivial(
    Z_used: TimeSeries,
    B: SpectrumLike,
    c,
    match_tol: float = DEFAULT_MATCH_TOL,
    separation_tol: float = DEFAULT_SEPARATION_TOL,
) -> float:
    """
    Share of squared mode norm carried by eigenvalues outside B.

    Modes are taken for the closest superset companion γ, with eigenvectors
    Vandermonde-normalized, on X̃ = Z_used without its last column. A series
    with all-zero modes gives 0.

    Raises:
        DegenerateSpectrumError: The superset companion has near-repeated eigenvalues
        EigenMatchingError: Some element of B has no eigenvalue within match_tol
    """
    B = _as_spectrum(B, "B")
    c = as_cvector(c, "c")
    if Z_used.theta != c.size:
        raise DimensionMismatchError("delta_trivial", f"series with θ={c.size}", f"θ={Z_used.theta}")

    return _delta_for_superset(Z_used, B, closest_superset_companion(B, c), match_tol, separation_tol)


def _delta_for_superset(
    Z_used: TimeSeries,
    B: SpectrumSet,
    gamma: np.ndarray,
    match_tol: float,
    separation_tol: float,
) -> float:
    eigenvalues, V, degenerate, separation = companion_eigensystem(gamma, separation_tol)
    if degenerate:
        raise DegenerateSpectrumError(separation, separation_tol)

    matched = set()
    for target in B.values:
        distances = np.abs(eigenvalues - target)
        idx = int(np.argmin(distances))
        if distances[idx] > match_tol:
            raise EigenMatchingError(complex(target), float(distances[idx]), match_tol)
        matched.add(idx)

    energy = _mode_norms(Z_used.X, V) ** 2
    total = float(energy.sum())
    if total == 0.0:
        return 0.0
    inside = float(energy[sorted(matched)].sum())
    return float(np.clip(1.0 - inside / total, 0.0, 1.0))


def kmd_quality(
    Z_used: TimeSeries,
    B: SpectrumLike,
    c,
    match_tol: float = DEFAULT_MATCH_TOL,
    separation_tol: float = DEFAULT_SEPARATION_TOL,
) -> KmdQualityReport:
    """
    KMD-Quality of the model c (fitted on Z_used) against target B.

    Returns:
        KmdQualityReport with ρ_subset, δ_trivial, quality and γ
    """
    B = _as_spectrum(B, "B")
    c = as_cvector(c, "c")
    model_spectrum = SpectrumSet(scipy.linalg.eigvals(companion_from(c), check_finite=False), 0.0)

    rho = rho_subset(B, model_spectrum)
    if Z_used.theta != c.size:
        raise DimensionMismatchError("kmd_quality", f"series with θ={c.size}", f"θ={Z_used.theta}")
    gamma = closest_superset_companion(B, c)
    delta = _delta_for_superset(Z_used, B, gamma, match_tol, separation_tol)
    quality = 1.0 - max(1.0 - 10.0 ** (-rho), delta)

    logger.debug(f"KMD-Quality θ={c.size}: ρ={rho:.3e}, δ={delta:.3e}, quality={quality:.6f}")
    return KmdQualityReport(
        rho_subset=rho,
        delta_trivial=delta,
        quality=quality,
        superset_c=to_pairs(gamma),
    )


def msub_efficacy(
    spectrum: SpectrumLike,
    p_max: int = DEFAULT_P_MAX,
    tol: float = ROOT_OF_UNITY_TOL,
) -> MsubEfficacy:
    """
    Predict whether mean subtraction removes the eigenvalue 1.

    For a Koopman-invariant dictionary, mean subtraction succeeds exactly when
    the trajectory length n+1 is a multiple of p*, the least p with λ^p = 1
    for every eigenvalue. Without such p ≤ p_max it always fails.
    """
    spectrum = _as_spectrum(spectrum, "spectrum")
    if p_max < 1:
        raise InvalidParameterError("p_max", p_max, "must be at least 1")

    values = spectrum.values
    p_star = None
    for p in range(1, p_max + 1):
        if np.all(np.abs(values ** p - 1.0) < tol):
            p_star = p
            break

    return MsubEfficacy(
        p_star=p_star,
        one_in_spectrum=spectrum.contains(1.0, tol),
        p_max=p_max,
    )


def msub_case_analysis(sys: LtiSystem, num_snapshots: int, tol: float = ROOT_OF_UNITY_TOL) -> MsubCase:
    """
    Rewrite ``Z_ms = C Θ - μ 1ᵀ`` as ``C_ms Θ_ms`` and report the nodes of Θ_ms.

    With C of full column rank there are four cases:

    * μ ≠ 0 and 1 ∉ σ: Θ_ms gains an all-ones row
    * μ = 0: Θ_ms = Θ, which has no ones row
    * 1 ∈ σ and the mode at 1 equals μ: the ones row cancels
    * 1 ∈ σ and the mode at 1 differs from μ: the ones row stays

    Comparisons are relative to the largest mode norm.
    """
    if num_snapshots < 2:
        raise InvalidParameterError("num_snapshots", num_snapshots, "must be at least 2")

    eigenvalues = sys.eigenvalues.values
    C = sys.mode_matrix
    # Temporal mean of Z = C Θ without forming Z
    mu = C @ vandermonde(eigenvalues, num_snapshots).mean(axis=1)
    scale = float(np.linalg.norm(C, axis=0).max())

    one_hits = np.flatnonzero(np.abs(eigenvalues - 1.0) < tol)
    mu_zero = np.linalg.norm(mu) <= tol * scale

    if one_hits.size == 0:
        if mu_zero:
            return MsubCase("mean_zero", SpectrumSet(eigenvalues), False, mu)
        return MsubCase("ones_row_added", SpectrumSet(eigenvalues).union([1.0]), True, mu)

    mode_at_one = C[:, one_hits[0]]
    if np.linalg.norm(mode_at_one - mu) <= tol * scale:
        return MsubCase("ones_row_removed", SpectrumSet(eigenvalues).without(1.0, tol), False, mu)
    return MsubCase("ones_row_kept", SpectrumSet(eigenvalues), True, mu)


def target_spectrum(true_spectrum: SpectrumSet, target: KmdTarget) -> SpectrumSet:
    """Target set B derived from the true spectrum."""
    target = KmdTarget(target)
    if target is KmdTarget.SIGMA:
        return true_spectrum
    if target is KmdTarget.SIGMA_MINUS_ONE:
        return true_spectrum.without(1.0, 1e-9).require_nonempty("σ(Λ)∖{1}")
    return true_spectrum.union([1.0])

