"""
Dense complex linear-algebra primitives.

Every matrix handled here is a numpy ``complex128`` array in row-major (C)
order; real input is promoted on ingestion. Pseudo-inverses, projectors and
ranks all go through one truncated SVD whose cutoff is relative to the
largest singular value.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg

from kmdlab.core.exceptions import (
    DimensionMismatchError,
    EmptyInputError,
    InvalidParameterError,
    NonFiniteInputError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SvdThreshold:
    """Relative singular value cutoff, 0 < relative_tolerance < 1."""

    relative_tolerance: float = 1e-8

    def __post_init__(self):
        tol = float(self.relative_tolerance)
        if not 0.0 < tol < 1.0:
            raise InvalidParameterError(
                "relative_tolerance", self.relative_tolerance, "must lie in (0, 1)"
            )
        object.__setattr__(self, "relative_tolerance", tol)


DEFAULT_SVD_THRESHOLD = SvdThreshold(1e-8)

Tolerance = Union[SvdThreshold, float, None]


def resolve_tolerance(tol: Tolerance) -> float:
    """Turn a threshold, a bare float or None (the default) into a float."""
    if tol is None:
        return DEFAULT_SVD_THRESHOLD.relative_tolerance
    if isinstance(tol, SvdThreshold):
        return tol.relative_tolerance
    return SvdThreshold(float(tol)).relative_tolerance


def as_cmatrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and promote input to a finite 2-D complex array."""
    arr = np.array(a, dtype=np.complex128, copy=True)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionMismatchError(name, "2-D array", f"{arr.ndim}-D array")
    if arr.size == 0:
        raise EmptyInputError(name)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInputError(name)
    return arr


def as_cvector(v, name: str = "vector") -> np.ndarray:
    """Validate and promote input to a finite 1-D complex array."""
    arr = np.array(v, dtype=np.complex128, copy=True).reshape(-1)
    if arr.size == 0:
        raise EmptyInputError(name)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInputError(name)
    return arr


def truncated_svd(
    A: np.ndarray,
    tol: Tolerance = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Thin SVD keeping singular values above ``tol * max singular value``.

    Returns:
        (U_r, s_r, Vh_r); r may be 0 for the zero matrix
    """
    rel = resolve_tolerance(tol)
    try:
        U, s, Vh = scipy.linalg.svd(A, full_matrices=False, check_finite=False)
    except np.linalg.LinAlgError:
        logger.warning(f"gesdd failed on {A.shape} matrix, retrying with gesvd")
        U, s, Vh = scipy.linalg.svd(
            A, full_matrices=False, check_finite=False, lapack_driver="gesvd"
        )

    if s.size == 0 or s[0] == 0.0:
        return U[:, :0], s[:0], Vh[:0, :]

    keep = s > rel * s[0]
    r = int(np.count_nonzero(keep))
    return U[:, :r], s[:r], Vh[:r, :]


def pseudo_inverse(A, tol: Tolerance = None) -> np.ndarray:
    """Truncated Moore-Penrose pseudo-inverse."""
    A = as_cmatrix(A, "A")
    U, s, Vh = truncated_svd(A, tol)
    return (Vh.conj().T / s) @ U.conj().T


def min_norm_lstsq(A, b, tol: Tolerance = None) -> np.ndarray:
    """
    Minimum-norm least-squares solution ``A† b`` via the truncated SVD.

    Among minimizers of ``||Ax - b||`` the returned x has the least norm, up
    to the singular values dropped by the threshold.
    """
    A = as_cmatrix(A, "A")
    b = as_cvector(b, "b")
    if A.shape[0] != b.size:
        raise DimensionMismatchError("min_norm_lstsq", f"b of length {A.shape[0]}", b.size)

    U, s, Vh = truncated_svd(A, tol)
    return Vh.conj().T @ ((U.conj().T @ b) / s)


def numerical_rank(A, tol: Tolerance = None) -> int:
    """Number of singular values above the relative threshold."""
    A = as_cmatrix(A, "A")
    _, s, _ = truncated_svd(A, tol)
    return int(s.size)


def nullspace_projection(A, v, tol: Tolerance = None) -> np.ndarray:
    """Orthogonal projection of v onto N(A): ``(I - A†A) v``."""
    A = as_cmatrix(A, "A")
    v = as_cvector(v, "v")
    if A.shape[1] != v.size:
        raise DimensionMismatchError("nullspace_projection", f"v of length {A.shape[1]}", v.size)

    _, _, Vh = truncated_svd(A, tol)
    return v - Vh.conj().T @ (Vh @ v)


def row_space_projection(A, v, tol: Tolerance = None) -> np.ndarray:
    """Orthogonal projection of v onto R(A^H): ``A†A v``."""
    A = as_cmatrix(A, "A")
    v = as_cvector(v, "v")
    if A.shape[1] != v.size:
        raise DimensionMismatchError("row_space_projection", f"v of length {A.shape[1]}", v.size)

    _, _, Vh = truncated_svd(A, tol)
    return Vh.conj().T @ (Vh @ v)


def best_rank_approximation(A, rank: int) -> np.ndarray:
    """Eckart-Young truncation of A to the given rank."""
    A = as_cmatrix(A, "A")
    if rank < 1 or rank > min(A.shape):
        raise InvalidParameterError("rank", rank, f"must lie in [1, {min(A.shape)}]")
    U, s, Vh = scipy.linalg.svd(A, full_matrices=False, check_finite=False)
    return (U[:, :rank] * s[:rank]) @ Vh[:rank, :]


def vandermonde(nodes, num_cols: int) -> np.ndarray:
    """Row i is ``[1, λ_i, λ_i², …, λ_i^(num_cols-1)]``."""
    nodes = as_cvector(nodes, "nodes")
    if num_cols < 1:
        raise InvalidParameterError("num_cols", num_cols, "must be at least 1")
    return np.vander(nodes, num_cols, increasing=True)


def companion_from(c) -> np.ndarray:
    """
    Companion matrix T[c]: ones on the first sub-diagonal, c as last column.

    Its characteristic polynomial is ``z^n - c_n z^(n-1) - … - c_1``, so the
    eigenvalues are the roots of ``c_1 + c_2 z + … + c_n z^(n-1) - z^n``.
    """
    c = as_cvector(c, "c")
    n = c.size
    T = np.zeros((n, n), dtype=np.complex128)
    if n > 1:
        T[np.arange(1, n), np.arange(n - 1)] = 1.0
    T[:, -1] = c
    return T


def gp_vector(lam: complex, length: int) -> np.ndarray:
    """Geometric progression ``[1, λ, …, λ^(length-1)]``."""
    if length < 1:
        raise InvalidParameterError("length", length, "must be at least 1")
    return np.complex128(lam) ** np.arange(length)


def ones(n: int) -> np.ndarray:
    """The constant vector 1_n."""
    return np.ones(n, dtype=np.complex128)


def spectral_order(values: np.ndarray, decimals: int = 10) -> np.ndarray:
    """
    Indices sorting eigenvalues by descending modulus, ties by ascending phase.

    Phases are taken in (-π, π]; moduli are compared after rounding so that
    values equal up to rounding noise tie.
    """
    values = np.asarray(values, dtype=np.complex128)
    phase = np.angle(values)
    phase = np.where(np.isclose(phase, -np.pi), np.pi, phase)
    modulus = np.round(np.abs(values), decimals)
    return np.lexsort((phase, -modulus))


def min_pairwise_distance(values: np.ndarray) -> float:
    """Smallest |λ_i - λ_j| over i ≠ j (inf for fewer than two values)."""
    values = np.asarray(values, dtype=np.complex128)
    if values.size < 2:
        return float("inf")
    diff = np.abs(values[:, None] - values[None, :])
    np.fill_diagonal(diff, np.inf)
    return float(diff.min())


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    """``||actual - expected|| / ||expected||`` (absolute error when expected is 0)."""
    scale = float(np.linalg.norm(expected))
    err = float(np.linalg.norm(np.asarray(actual) - np.asarray(expected)))
    return err / scale if scale > 0 else err


def monic_from_roots(roots) -> np.ndarray:
    """Ascending coefficients of the monic polynomial with the given roots."""
    roots = np.asarray(roots, dtype=np.complex128).reshape(-1)
    # np.poly returns descending coefficients, leading 1
    return np.poly(roots)[::-1].astype(np.complex128) if roots.size else np.ones(1, np.complex128)


def convolution_matrix(a: np.ndarray, num_cols: int) -> np.ndarray:
    """Matrix M with ``M @ x == np.convolve(a, x)`` for x of length num_cols."""
    a = np.asarray(a, dtype=np.complex128).reshape(-1)
    return scipy.linalg.convolution_matrix(a, num_cols, mode="full")


__all__ = [
    "DEFAULT_SVD_THRESHOLD",
    "SvdThreshold",
    "Tolerance",
    "as_cmatrix",
    "as_cvector",
    "best_rank_approximation",
    "companion_from",
    "convolution_matrix",
    "gp_vector",
    "min_norm_lstsq",
    "min_pairwise_distance",
    "monic_from_roots",
    "nullspace_projection",
    "numerical_rank",
    "ones",
    "pseudo_inverse",
    "relative_error",
    "resolve_tolerance",
    "row_space_projection",
    "spectral_order",
    "truncated_svd",
    "vandermonde",
]
