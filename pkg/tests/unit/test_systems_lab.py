"""
Unit tests for the test-system generators and time series CSV files.
"""

import numpy as np
import pytest

from kmdlab.core.exceptions import (
    CsvFormatError,
    InsufficientSnapshotsError,
    IntegrationError,
    InvalidParameterError,
    NonFiniteInputError,
)
from kmdlab.linalg.kernel import numerical_rank
from kmdlab.models.domain import TimeSeries
from kmdlab.models.enums import ComplexCsvFormat
from kmdlab.models.requests import VdpConfig
from kmdlab.services.systems_lab import (
    INITIAL_STATE_MAGNITUDE,
    PRESET_SEPARATION,
    _parse_cell,
    export_csv,
    ingest_csv,
    is_koopman_invariant,
    is_well_posed,
    lti_trajectory,
    make_lti,
    min_delays_for_invariance,
    random_lti,
    redraw_observation,
    rk4_step,
    vdp_field,
    vdp_states,
    vdp_trajectory,
)

pytestmark = pytest.mark.unit


# =========================
# LTI presets
# =========================

class TestMakeLti:
    """Test make_lti presets."""

    def test_lti1a_contains_one(self, lti1a):
        assert lti1a.r == 7
        assert lti1a.eigenvalues.contains(1.0, 1e-12)

    def test_lti1b_on_unit_circle(self, lti1b):
        np.testing.assert_allclose(np.abs(lti1b.eigenvalues.values), 1.0, atol=1e-12)
        assert not lti1b.eigenvalues.contains(1.0, 1e-3)

    def test_lti3_moduli(self):
        system = make_lti("LTI3", m=2, seed=9)
        moduli = np.sort(np.abs(system.eigenvalues.values))[::-1]
        np.testing.assert_allclose(moduli[:4], 1.0, atol=1e-12)
        np.testing.assert_allclose(moduli[4:], [0.97, 0.93, 0.87], atol=1e-12)

    def test_dictionary_magnitudes(self):
        system = make_lti("LTI1a", m=5, seed=1)
        magnitudes = np.abs(system.dictionary)
        assert magnitudes.min() >= 0.5
        assert magnitudes.max() <= 1.5

    def test_initial_state_magnitudes(self):
        low, high = INITIAL_STATE_MAGNITUDE
        for seed in range(5):
            magnitudes = np.abs(make_lti("LTI1b", seed=seed).initial_state)
            assert magnitudes.min() >= low
            assert magnitudes.max() <= high

    @pytest.mark.parametrize("preset", ["LTI1b", "LTI3"])
    def test_random_presets_are_separated(self, preset):
        for seed in range(10):
            values = np.append(make_lti(preset, seed=seed).eigenvalues.values, 1.0)
            spread = np.abs(values[:, None] - values[None, :])
            np.fill_diagonal(spread, np.inf)
            assert spread.min() >= PRESET_SEPARATION

    def test_full_rank_dictionary(self, lti1a_full_rank):
        assert numerical_rank(lti1a_full_rank.dictionary) == 7
        assert is_koopman_invariant(lti1a_full_rank)

    def test_full_rank_needs_enough_observables(self):
        with pytest.raises(InvalidParameterError):
            make_lti("LTI1a", m=3, full_rank_dictionary=True)

    def test_custom_spectrum(self):
        system = make_lti("Custom", m=2, seed=0, eigenvalues=[0.5, -0.5j])
        assert system.r == 2

    def test_custom_needs_eigenvalues(self):
        with pytest.raises(InvalidParameterError):
            make_lti("Custom")

    def test_custom_rejects_repeats(self):
        with pytest.raises(InvalidParameterError):
            make_lti("Custom", eigenvalues=[0.5, 0.5])

    def test_invalid_m(self):
        with pytest.raises(InvalidParameterError):
            make_lti("LTI1a", m=0)

    def test_seed_determinism(self):
        a, b = make_lti("LTI3", m=3, seed=42), make_lti("LTI3", m=3, seed=42)
        np.testing.assert_array_equal(a.eigenvalues.values, b.eigenvalues.values)
        np.testing.assert_array_equal(a.dictionary, b.dictionary)
        np.testing.assert_array_equal(a.initial_state, b.initial_state)

    def test_redraw_keeps_spectrum(self, lti1b):
        fresh = redraw_observation(lti1b, seed=77)
        np.testing.assert_array_equal(fresh.eigenvalues.values, lti1b.eigenvalues.values)
        assert not np.allclose(fresh.dictionary, lti1b.dictionary)

    def test_random_lti(self):
        system = random_lti(5, m=2, modulus_range=(0.8, 0.9), seed=4)
        moduli = np.abs(system.eigenvalues.values)
        assert system.r == 5
        assert np.all((moduli >= 0.8) & (moduli <= 0.9))


# =========================
# LTI trajectories
# =========================

class TestLtiTrajectory:
    """Test lti_trajectory."""

    def test_shape(self, lti1a):
        assert lti_trajectory(lti1a, 36).data.shape == (1, 36)

    def test_matches_recursion(self, lti1b):
        Z = lti_trajectory(lti1b, 25)
        state = lti1b.initial_state.copy()
        Lam = lti1b.eigenvalues.values
        for j in range(25):
            expected = lti1b.dictionary @ state
            np.testing.assert_allclose(Z.data[:, j], expected, rtol=1e-12, atol=1e-8)
            state = Lam * state

    def test_mean_over_full_period_is_mode_at_one(self, lti1a):
        Z = lti_trajectory(lti1a, 14)
        idx = int(np.argmin(np.abs(lti1a.eigenvalues.values - 1.0)))
        np.testing.assert_allclose(Z.data.mean(axis=1), lti1a.mode_matrix[:, idx], rtol=1e-10)

    def test_too_short(self, lti1a):
        with pytest.raises(InvalidParameterError):
            lti_trajectory(lti1a, 1)

    def test_well_posed(self, lti1a):
        assert is_well_posed(lti1a, 7)
        assert not is_well_posed(lti1a, 7, strict=True)
        assert not is_well_posed(lti1a, 6)

    def test_min_delays_for_scalar_observable(self, lti1a):
        assert min_delays_for_invariance(lti1a) == 6


# =========================
# Van der Pol
# =========================

class TestVanDerPol:
    """Test the RK4 Van der Pol sampler."""

    def test_rk4_convergence_order(self):
        f = vdp_field(1.0)
        x0 = np.array([1.0, 0.5])
        horizon = 1.0

        def integrate(dt):
            x = x0.copy()
            for _ in range(int(round(horizon / dt))):
                x = rk4_step(f, x, dt)
            return x

        reference = integrate(0.1 / 8)
        coarse = np.linalg.norm(integrate(0.1) - reference)
        fine = np.linalg.norm(integrate(0.05) - reference)
        assert 10.0 < coarse / fine < 22.0

    def test_limit_cycle_amplitude(self):
        cfg = VdpConfig(initial=(0.1, 0.0), dt=0.01, sample_stride=1, num_samples=2000, burn_in_steps=5000)
        peak = np.abs(vdp_states(cfg)[0]).max()
        assert peak == pytest.approx(2.009, abs=0.01)

    @pytest.mark.slow
    def test_bounded_long_run(self):
        cfg = VdpConfig(initial=(0.1, 0.0), dt=0.01, sample_stride=100, num_samples=1001)
        states = vdp_states(cfg)
        assert np.linalg.norm(states, axis=0).max() < 10.0

    def test_trajectory_observation(self):
        cfg = VdpConfig(num_samples=50)
        Z = vdp_trajectory(cfg, [[0.0, 2.0]])
        np.testing.assert_allclose(Z.data[0].real, 2.0 * vdp_states(cfg)[1])
        assert Z.data.shape == (1, 50)

    def test_dictionary_shape(self):
        with pytest.raises(InvalidParameterError):
            vdp_trajectory(VdpConfig(num_samples=10), [1.0, 0.0, 0.0])

    def test_blow_up_detected(self):
        cfg = VdpConfig(initial=(50.0, 50.0), dt=0.5, sample_stride=5, num_samples=20, mu=5.0)
        with pytest.raises(IntegrationError):
            vdp_states(cfg)


# =========================
# CSV
# =========================

class TestCsv:
    """Test ingest_csv and export_csv."""

    def test_real_round_trip(self, tmp_path):
        Z = TimeSeries(np.array([[0.1, 1 / 3, -2.5], [1e-17, 4.0, np.pi]]))
        path = export_csv(Z, tmp_path / "real.csv")
        np.testing.assert_array_equal(ingest_csv(path).data, Z.data)

    def test_complex_round_trip(self, tmp_path, lti1a_series):
        for fmt in (ComplexCsvFormat.PAIRED, ComplexCsvFormat.INLINE):
            path = export_csv(lti1a_series, tmp_path / f"{fmt.value}.csv", fmt)
            np.testing.assert_array_equal(ingest_csv(path, fmt).data, lti1a_series.data)

    def test_paired_row(self, tmp_path):
        path = tmp_path / "paired.csv"
        path.write_text("1,2;3,-4\n", encoding="utf-8")
        Z = ingest_csv(path)
        np.testing.assert_array_equal(Z.data, [[1 + 2j, 3 - 4j]])

    def test_inline_detected(self, tmp_path):
        path = tmp_path / "inline.csv"
        path.write_text("obs_1,obs_2,obs_3\n1+2i,3-1i,0.5+0i\n", encoding="utf-8")
        Z = ingest_csv(path)
        np.testing.assert_array_equal(Z.data, [[1 + 2j, 3 - 1j, 0.5]])

    @pytest.mark.parametrize("cell,expected", [
        ("1.5-2i", 1.5 - 2j),
        ("3i", 3j),
        ("-inf", complex(-np.inf)),
        ("inf", complex(np.inf)),
        ("1+infi", complex(1.0, np.inf)),
    ])
    def test_inline_cell_values(self, cell, expected):
        assert _parse_cell(cell, ComplexCsvFormat.INLINE) == expected

    def test_inline_nan_cell(self):
        assert np.isnan(_parse_cell("nan", ComplexCsvFormat.INLINE).real)

    def test_leading_inf_row_is_data_not_header(self, tmp_path):
        path = tmp_path / "inf.csv"
        path.write_text("inf,1+2i,3\n", encoding="utf-8")
        with pytest.raises(NonFiniteInputError):
            ingest_csv(path)

    def test_header_skipped(self, tmp_path):
        path = tmp_path / "header.csv"
        path.write_text("obs_1,obs_2\n1,2\n3,4\n", encoding="utf-8")
        assert ingest_csv(path).data.shape == (2, 2)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(CsvFormatError):
            ingest_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CsvFormatError):
            ingest_csv(tmp_path / "nope.csv")

    def test_ragged_rows(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1,2,3\n4,5\n", encoding="utf-8")
        with pytest.raises(CsvFormatError) as exc_info:
            ingest_csv(path)
        assert exc_info.value.details['line'] == 2

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2,3\n4,x,6\n", encoding="utf-8")
        with pytest.raises(CsvFormatError):
            ingest_csv(path)

    def test_single_column(self, tmp_path):
        path = tmp_path / "single.csv"
        path.write_text("1\n2\n", encoding="utf-8")
        with pytest.raises(InsufficientSnapshotsError):
            ingest_csv(path)

    def test_fixture_file(self, fixtures_dir):
        Z = ingest_csv(fixtures_dir / "lti_sample.csv")
        assert Z.data.shape == (2, 8)
