"""
Unit tests for the linear algebra kernel.

Tests thresholds, minimum-norm solves, projections, Vandermonde and companion
construction.
"""

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st
from hypothesis.extra.numpy import arrays

from kmdlab.core.exceptions import (
    DimensionMismatchError,
    EmptyInputError,
    InvalidParameterError,
    NonFiniteInputError,
)
from kmdlab.linalg.kernel import (
    SvdThreshold,
    as_cmatrix,
    best_rank_approximation,
    companion_from,
    convolution_matrix,
    gp_vector,
    min_norm_lstsq,
    min_pairwise_distance,
    monic_from_roots,
    nullspace_projection,
    numerical_rank,
    pseudo_inverse,
    resolve_tolerance,
    row_space_projection,
    spectral_order,
    vandermonde,
)

pytestmark = pytest.mark.unit


# =========================
# Thresholds and validation
# =========================

class TestSvdThreshold:
    """Test SvdThreshold validation."""

    def test_default(self):
        assert resolve_tolerance(None) == 1e-8

    def test_float_and_threshold(self):
        assert resolve_tolerance(1e-6) == 1e-6
        assert resolve_tolerance(SvdThreshold(1e-4)) == 1e-4

    @pytest.mark.parametrize("value", [0.0, 1.0, -1e-3, 2.0])
    def test_out_of_range(self, value):
        with pytest.raises(InvalidParameterError):
            SvdThreshold(value)


def test_as_cmatrix_promotes_rows():
    A = as_cmatrix([1, 2, 3])
    assert A.shape == (1, 3)
    assert A.dtype == np.complex128


def test_as_cmatrix_rejects_nan():
    with pytest.raises(NonFiniteInputError):
        as_cmatrix([[1.0, np.nan]])


def test_as_cmatrix_rejects_empty():
    with pytest.raises(EmptyInputError):
        as_cmatrix(np.zeros((0, 3)))


# =========================
# Minimum-norm least squares
# =========================

class TestMinNormLstsq:
    """Test min_norm_lstsq."""

    def test_identity(self):
        x = min_norm_lstsq(np.eye(3), [1, 2, 3])
        np.testing.assert_allclose(x, [1, 2, 3])

    def test_rank_deficient_picks_min_norm(self):
        x = min_norm_lstsq([[1, 1], [1, 1]], [2, 2])
        np.testing.assert_allclose(x, [1, 1], atol=1e-12)

    def test_matches_normal_equations(self, rng):
        A = rng.standard_normal((8, 3))
        b = rng.standard_normal(8)
        expected = np.linalg.solve(A.T @ A, A.T @ b)
        np.testing.assert_allclose(min_norm_lstsq(A, b), expected, rtol=1e-10)

    def test_zero_matrix_gives_zero(self):
        np.testing.assert_array_equal(min_norm_lstsq(np.zeros((3, 2)), [1, 2, 3]), [0, 0])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            min_norm_lstsq(np.eye(3), [1, 2])

    def test_pseudo_inverse_penrose(self, rng):
        A = rng.standard_normal((5, 3)) @ rng.standard_normal((3, 6))
        P = pseudo_inverse(A)
        np.testing.assert_allclose(A @ P @ A, A, atol=1e-10)
        np.testing.assert_allclose(P @ A @ P, P, atol=1e-10)


# =========================
# Rank and projections
# =========================

def test_numerical_rank_examples(seventh_roots):
    assert numerical_rank(np.eye(4)) == 4
    assert numerical_rank(np.ones((3, 3))) == 1
    assert numerical_rank(vandermonde(seventh_roots, 10)) == 7
    assert numerical_rank(vandermonde(seventh_roots, 7)) == 7


def test_numerical_rank_of_zero_matrix():
    assert numerical_rank(np.zeros((3, 3))) == 0


class TestProjections:
    """Test null space and row space projections."""

    def test_identity_has_trivial_nullspace(self):
        np.testing.assert_allclose(nullspace_projection(np.eye(3), [1, 2, 3]), 0, atol=1e-14)

    def test_vector_in_row_space(self):
        np.testing.assert_allclose(nullspace_projection([[1, 1]], [1, 1]), [0, 0], atol=1e-14)

    def test_vector_orthogonal_to_row_space(self):
        np.testing.assert_allclose(nullspace_projection([[1, -1]], [1, 1]), [1, 1], atol=1e-14)

    def test_projections_sum_to_vector(self, rng):
        A = rng.standard_normal((3, 6))
        v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        total = nullspace_projection(A, v) + row_space_projection(A, v)
        np.testing.assert_allclose(total, v, atol=1e-12)

    @hyp_settings(max_examples=40, deadline=None)
    @given(
        arrays(np.float64, (4, 7), elements=st.floats(-10, 10, allow_nan=False, allow_infinity=False)),
        arrays(np.float64, 7, elements=st.floats(-10, 10, allow_nan=False, allow_infinity=False)),
    )
    def test_nullspace_projection_is_idempotent(self, A, v):
        p = nullspace_projection(A, v)
        np.testing.assert_allclose(nullspace_projection(A, p), p, atol=1e-8 * (1 + np.linalg.norm(v)))


# =========================
# Structured matrices
# =========================

class TestVandermonde:
    """Test vandermonde construction."""

    def test_single_node(self):
        np.testing.assert_array_equal(vandermonde([1], 4), [[1, 1, 1, 1]])

    def test_two_nodes(self):
        np.testing.assert_array_equal(vandermonde([2, 3], 3), [[1, 2, 4], [1, 3, 9]])

    def test_invalid_columns(self):
        with pytest.raises(InvalidParameterError):
            vandermonde([1, 2], 0)


class TestCompanion:
    """Test companion_from."""

    def test_two_by_two(self):
        np.testing.assert_array_equal(companion_from([1, 0]), [[0, 1], [1, 0]])

    def test_structure(self):
        T = companion_from([5, 6, 7])
        expected = np.array([[0, 0, 5], [1, 0, 6], [0, 1, 7]])
        np.testing.assert_array_equal(T, expected)

    def test_eigenvalues_are_roots(self):
        # z² - 5z + 6 has roots 2 and 3 with c = [-6, 5]
        eigs = np.sort(np.linalg.eigvals(companion_from([-6, 5])).real)
        np.testing.assert_allclose(eigs, [2, 3])

    def test_dft_coefficients(self):
        eigs = np.linalg.eigvals(companion_from(-np.ones(4)))
        np.testing.assert_allclose(np.abs(eigs ** 5 - 1), 0, atol=1e-12)


@pytest.mark.parametrize("lam,length,expected", [
    (1, 5, [1, 1, 1, 1, 1]),
    (2, 4, [1, 2, 4, 8]),
    (1j, 4, [1, 1j, -1, -1j]),
])
def test_gp_vector(lam, length, expected):
    np.testing.assert_allclose(gp_vector(lam, length), expected, atol=1e-15)


def test_spectral_order_by_modulus_then_phase():
    values = np.array([0.5, 1j, -1, 1, -1j])
    ordered = values[spectral_order(values)]
    np.testing.assert_array_equal(ordered, [-1j, 1, 1j, -1, 0.5])


def test_min_pairwise_distance():
    assert min_pairwise_distance(np.array([0, 3, 3.5])) == pytest.approx(0.5)
    assert min_pairwise_distance(np.array([1.0])) == float("inf")


def test_monic_from_roots_ascending():
    np.testing.assert_allclose(monic_from_roots([2, 3]), [6, -5, 1])


def test_convolution_matrix_matches_convolve(rng):
    a = rng.standard_normal(3)
    x = rng.standard_normal(4)
    np.testing.assert_allclose(convolution_matrix(a, 4) @ x, np.convolve(a, x))


def test_convolution_matrix_complex_monic(rng):
    b = monic_from_roots(np.exp(1j * rng.uniform(-np.pi, np.pi, size=3)))
    x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    M = convolution_matrix(b, 5)
    assert M.shape == (b.size + 4, 5)
    np.testing.assert_allclose(M @ x, np.convolve(b, x), atol=1e-12)


def test_best_rank_approximation(rng):
    A = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 5))
    np.testing.assert_allclose(best_rank_approximation(A, 2), A, atol=1e-10)
    assert numerical_rank(best_rank_approximation(A, 1)) == 1
    with pytest.raises(InvalidParameterError):
        best_rank_approximation(A, 6)
