"""
Unit tests for mode-norm pruning, the closest superset companion and KMD-Quality.
"""

from dataclasses import replace

import numpy as np
import pytest

import kmdlab.services.spectral_pruning as pruning
from kmdlab.core.exceptions import (
    DegenerateSpectrumError,
    DimensionMismatchError,
    EmptyInputError,
    EigenMatchingError,
)
from kmdlab.linalg.kernel import companion_from, monic_from_roots
from kmdlab.models.domain import SpectrumSet, TimeSeries
from kmdlab.models.enums import KmdTarget
from kmdlab.services.dmd_engine import fit_companion
from kmdlab.services.preprocess import delay_embed, ms_then_delay
from kmdlab.services.spectral_pruning import (
    closest_superset_companion,
    delta_trivial,
    kmd_quality,
    msub_case_analysis,
    msub_efficacy,
    rho_subset,
    sigma_nontriv,
    target_spectrum,
)
from kmdlab.services.systems_lab import lti_trajectory, make_lti

pytestmark = pytest.mark.unit


# =========================
# Pruning
# =========================

class TestSigmaNontriv:
    """Test sigma_nontriv."""

    def test_doubling_series_keeps_two(self, doubling_series):
        model = fit_companion(doubling_series)
        pruned = sigma_nontriv(model, doubling_series)
        assert len(pruned.kept) == 1
        assert pruned.kept.contains(2.0, 1e-10)
        assert len(pruned.discarded) == 2
        assert len(pruned.mode_norms) == 3

    def test_lti1a_keeps_true_spectrum(self, lti1a_series, seventh_roots):
        Z = delay_embed(lti1a_series.window(0, 17), 6)
        pruned = sigma_nontriv(fit_companion(Z), Z)
        assert len(pruned.kept) == 7
        for root in seventh_roots:
            assert pruned.kept.contains(root, 1e-6)

    def test_degenerate_model_refused(self, doubling_series):
        model = replace(fit_companion(doubling_series), degenerate=True, min_separation=0.0)
        with pytest.raises(DegenerateSpectrumError):
            sigma_nontriv(model, doubling_series)

    def test_series_must_match_model(self, doubling_series):
        model = fit_companion(doubling_series)
        with pytest.raises(DimensionMismatchError):
            sigma_nontriv(model, doubling_series.window(0, 3))


# =========================
# Set distance and superset companion
# =========================

class TestRhoSubset:
    """Test rho_subset."""

    def test_subset_is_zero(self):
        assert rho_subset([1, 2], [3, 2, 1]) == 0.0

    def test_distance(self):
        assert rho_subset([2], [1, -1]) == pytest.approx(1.0)

    def test_within_tolerance(self):
        assert rho_subset([1 + 1e-13], [1]) < 1e-12

    def test_empty_set(self):
        with pytest.raises(EmptyInputError):
            rho_subset([], [1])


class TestClosestSupersetCompanion:
    """Test closest_superset_companion."""

    def test_already_contains(self):
        np.testing.assert_allclose(closest_superset_companion([1, -1], [1, 0]), [1, 0], atol=1e-12)

    def test_single_root(self):
        np.testing.assert_allclose(closest_superset_companion([1], [0, 0]), [0.5, 0.5], atol=1e-12)

    def test_fully_determined(self):
        np.testing.assert_allclose(closest_superset_companion([2, 3], [7, 7]), [-6, 5], atol=1e-12)

    def test_too_many_targets(self):
        with pytest.raises(DimensionMismatchError):
            closest_superset_companion([1, 2, 3], [0, 0])

    def test_spectrum_contains_targets(self, rng):
        B = [0.5 + 0.5j, -0.3, 1.2j]
        c = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        gamma = closest_superset_companion(B, c)
        eigs = np.linalg.eigvals(companion_from(gamma))
        assert rho_subset(B, eigs) < 1e-8

    def test_closer_than_random_feasible_vectors(self, rng):
        B = [np.exp(0.4j), np.exp(-1.1j)]
        c = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        gamma = closest_superset_companion(B, c)
        best = np.linalg.norm(c - gamma)
        b = monic_from_roots(B)
        for _ in range(100):
            factor = np.append(rng.standard_normal(3) + 1j * rng.standard_normal(3), 1.0)
            rival = -np.convolve(b, factor)[:5]
            assert best <= np.linalg.norm(c - rival) + 1e-12


# =========================
# KMD-Quality
# =========================

class TestDeltaTrivial:
    """Test delta_trivial."""

    def test_full_spectrum_is_zero(self, rng):
        Z = TimeSeries(rng.standard_normal((4, 4)))
        model = fit_companion(Z)
        assert delta_trivial(Z, model.eigenvalues, model.c_star) == pytest.approx(0.0, abs=1e-10)

    def test_doubling_series(self, doubling_series):
        model = fit_companion(doubling_series)
        assert delta_trivial(doubling_series, [2.0], model.c_star) == pytest.approx(0.0, abs=1e-10)

    def test_zero_series(self):
        Z = TimeSeries(np.zeros((1, 3)))
        assert delta_trivial(Z, [0.5], [0.1, 0.2]) == 0.0

    def test_mean_subtraction_leaves_mode_at_one(self, lti1a_full_rank):
        # 20 snapshots: not a multiple of 7
        Z = ms_then_delay(lti_trajectory(lti1a_full_rank, 20), 1)
        model = fit_companion(Z)
        B = target_spectrum(lti1a_full_rank.eigenvalues, KmdTarget.SIGMA_MINUS_ONE)
        assert delta_trivial(Z, B, model.c_star) > 1e-6


class TestKmdQuality:
    """Test kmd_quality."""

    def test_perfect_match(self, doubling_series):
        model = fit_companion(doubling_series)
        report = kmd_quality(doubling_series, [2.0], model.c_star)
        assert report.rho_subset < 1e-10
        assert report.quality == pytest.approx(1.0, abs=1e-9)

    def test_unit_rho(self):
        # Spectrum {1, -1}; target 2 is at distance 1 and the data only carry 2
        report = kmd_quality(TimeSeries(np.array([[1.0, 2.0, 4.0]])), [2.0], [1.0, 0.0])
        assert report.rho_subset == pytest.approx(1.0)
        assert report.delta_trivial == pytest.approx(0.0, abs=1e-12)
        assert report.quality == pytest.approx(0.1)
        np.testing.assert_allclose(report.superset_c_array, [1.6, 1.2], atol=1e-12)

    def test_lti1a_with_six_delays(self, lti1a, lti1a_series):
        Z = delay_embed(lti1a_series.window(0, 17), 6)
        model = fit_companion(Z)
        report = kmd_quality(Z, lti1a.eigenvalues, model.c_star)
        assert report.quality >= 1 - 1e-6

    def test_quality_in_unit_interval(self, rng):
        Z = TimeSeries(rng.standard_normal((2, 7)))
        model = fit_companion(Z)
        report = kmd_quality(Z, [0.3, -0.7j], model.c_star)
        assert 0.0 <= report.quality <= 1.0
        assert 0.0 <= report.delta_trivial <= 1.0

    def test_unmatched_target_raises(self, doubling_series, monkeypatch):
        monkeypatch.setattr(pruning, "closest_superset_companion", lambda B, c: np.array([0.1, 0.2, 0.3]))
        with pytest.raises(EigenMatchingError):
            kmd_quality(doubling_series, [5.0], [0.1, 0.2, 0.3])

    def test_series_must_match(self, doubling_series):
        with pytest.raises(DimensionMismatchError):
            kmd_quality(doubling_series, [2.0], [1.0, 0.0])


# =========================
# Mean subtraction efficacy
# =========================

class TestMsubEfficacy:
    """Test msub_efficacy and its case analysis."""

    def test_seventh_roots(self, seventh_roots):
        efficacy = msub_efficacy(seventh_roots)
        assert efficacy.p_star == 7
        assert efficacy.one_in_spectrum
        assert efficacy.succeeds_at(14)
        assert not efficacy.succeeds_at(10)

    def test_no_common_order(self):
        efficacy = msub_efficacy([-0.5, 1, 1j, -1j])
        assert efficacy.p_star is None
        assert not any(efficacy.succeeds_at(n) for n in range(2, 200))

    def test_fourth_roots(self):
        assert msub_efficacy([1j, -1j, -1]).p_star == 4

    @pytest.mark.parametrize("num_snapshots,case", [
        (14, "ones_row_removed"),
        (21, "ones_row_removed"),
        (10, "ones_row_kept"),
    ])
    def test_case_analysis_lti1a(self, lti1a_full_rank, num_snapshots, case):
        result = msub_case_analysis(lti1a_full_rank, num_snapshots)
        assert result.case == case
        assert result.succeeds is (case == "ones_row_removed")

    def test_case_analysis_without_one(self):
        system = make_lti("LTI1b", m=8, full_rank_dictionary=True, seed=2)
        result = msub_case_analysis(system, 12)
        assert result.case == "ones_row_added"
        assert len(result.nodes) == 8

    def test_agrees_with_efficacy(self, rng):
        for trial in range(100):
            p = int(rng.integers(2, 9))
            count = int(rng.integers(1, p + 1))
            powers = rng.choice(np.arange(p), size=count, replace=False)
            values = np.exp(2j * np.pi * powers / p)
            system = make_lti("Custom", m=count, full_rank_dictionary=True, seed=trial, eigenvalues=values)
            num_snapshots = int(rng.integers(2, 30))
            predicted = msub_efficacy(values).succeeds_at(num_snapshots)
            assert msub_case_analysis(system, num_snapshots).succeeds is predicted

    def test_agrees_with_efficacy_on_mixed_spectra(self, rng):
        # Roots of unity plus generic points on the unit circle
        for trial in range(100):
            p = int(rng.integers(2, 9))
            count = int(rng.integers(1, p + 1))
            powers = rng.choice(np.arange(p), size=count, replace=False)
            generic = np.exp(1j * rng.uniform(0.05, 2 * np.pi - 0.05, size=int(rng.integers(1, 3))))
            values = np.concatenate([np.exp(2j * np.pi * powers / p), generic])
            if np.min(np.abs(values[:, None] - values[None, :]) + np.eye(values.size)) < 1e-3:
                continue
            system = make_lti(
                "Custom", m=values.size, full_rank_dictionary=True, seed=trial, eigenvalues=values
            )
            num_snapshots = int(rng.integers(2, 30))
            efficacy = msub_efficacy(values)
            assert efficacy.p_star is None
            assert not efficacy.succeeds_at(num_snapshots)
            assert msub_case_analysis(system, num_snapshots).succeeds is False

    def test_generic_point_blocks_removal_on_period(self, lti1a_full_rank):
        # n = 14 removes 1 for the seventh roots alone, not once a generic point joins
        values = np.append(lti1a_full_rank.eigenvalues.values, np.exp(0.3j))
        system = make_lti("Custom", m=8, full_rank_dictionary=True, seed=5, eigenvalues=values)
        assert msub_case_analysis(lti1a_full_rank, 14).succeeds
        assert not msub_case_analysis(system, 14).succeeds
        assert not msub_efficacy(values).succeeds_at(14)


def test_target_spectrum(lti1a):
    sigma = lti1a.eigenvalues
    assert len(target_spectrum(sigma, KmdTarget.SIGMA)) == 7
    assert len(target_spectrum(sigma, KmdTarget.SIGMA_MINUS_ONE)) == 6
    assert len(target_spectrum(sigma, KmdTarget.SIGMA_PLUS_ONE)) == 7
    lti1b = SpectrumSet(np.exp(1j * np.array([0.5, 1.5])))
    assert len(target_spectrum(lti1b, KmdTarget.SIGMA_PLUS_ONE)) == 3
