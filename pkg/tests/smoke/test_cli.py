"""
Smoke tests for the kmdlab command line.

Each test drives ``main(argv)`` in-process and checks the exit code and the
JSON or files it produces.
"""

import argparse
import json
import logging

import pytest

import kmdlab.cli as cli
from kmdlab.cli import main, parse_int_list
from kmdlab.core.exceptions import DegenerateSpectrumError
from kmdlab.services.systems_lab import ingest_csv

pytestmark = pytest.mark.smoke


# =========================
# Fixtures
# =========================

@pytest.fixture(autouse=True)
def restore_root_logger():
    """main() installs its own handlers; put pytest's back afterwards."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def run_cli(capsys):
    """Run main(argv) and return (exit code, stdout, stderr)."""
    def _run(*argv):
        code = main([str(a) for a in argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return _run


# =========================
# Argument parsing
# =========================

class TestParseIntList:
    """Test parse_int_list."""

    @pytest.mark.parametrize("text,expected", [
        ("5", [5]),
        ("2..5", [2, 3, 4, 5]),
        ("0,3,6", [0, 3, 6]),
        ("2..4,10,3", [2, 3, 4, 10]),
    ])
    def test_valid(self, text, expected):
        assert parse_int_list(text) == expected

    @pytest.mark.parametrize("text", ["5..2", "a", "", "-1"])
    def test_invalid(self, text):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_int_list(text)


def test_missing_subcommand_exits_with_usage_error():
    with pytest.raises(SystemExit) as exc_info:
        main([])
    assert exc_info.value.code == 2


# =========================
# Single fits
# =========================

class TestSingleFitCommands:
    """fit, dft-distance, prune and kmd-quality."""

    def test_simulate_writes_csv(self, run_cli, temp_output_dir):
        out = temp_output_dir / "lti1a.csv"
        code, _, _ = run_cli("simulate", "--system", "LTI1a", "--length", 20, "--seed", 3, "--out", out)
        assert code == 0
        assert ingest_csv(out).data.shape == (1, 20)

    def test_simulate_needs_out(self, run_cli):
        code, _, err = run_cli("simulate", "--length", 20)
        assert code == 2
        assert json.loads(err.strip().splitlines()[-1])['error_code'] == "INVALID_PARAMETER"

    def test_fit_report(self, run_cli):
        code, out, _ = run_cli("fit", "--system", "LTI1a", "--theta", 10, "--delays", 6)
        assert code == 0
        report = json.loads(out)
        assert report['theta'] == 10
        assert len(report['eigenvalues']) == 10
        assert report['regime'] == "over_sampled"

    def test_dft_distance_grid(self, run_cli):
        code, out, _ = run_cli("dft-distance", "--system", "LTI1a", "--theta", "5,8", "--delays", 6)
        assert code == 0
        reports = json.loads(out)
        assert [r['theta'] for r in reports] == [5, 8]
        assert reports[0]['equivalent'] is True
        assert reports[1]['equivalent'] is False

    def test_prune_from_csv(self, run_cli, fixtures_dir):
        code, out, _ = run_cli("prune", "--input", fixtures_dir / "lti_sample.csv", "--theta", 5)
        assert code == 0
        report = json.loads(out)
        assert report['kept'] is not None
        assert len(report['kept']) <= 5

    def test_input_too_short(self, run_cli, fixtures_dir):
        code, _, _ = run_cli("fit", "--input", fixtures_dir / "lti_sample.csv", "--theta", 9)
        assert code == 2

    def test_kmd_quality(self, run_cli, temp_output_dir):
        out = temp_output_dir / "quality.json"
        code, _, _ = run_cli("kmd-quality", "--system", "LTI1b", "--theta", 10, "--delays", 6, "--out", out)
        assert code == 0
        assert json.loads(out.read_text(encoding="utf-8"))['quality'] >= 1.0 - 1e-6

    def test_relative_out_goes_to_output_dir(self, run_cli, settings):
        code, _, _ = run_cli("fit", "--system", "LTI1a", "--theta", 8, "--delays", 6, "--out", "fit_rel.json")
        assert code == 0
        assert json.loads((settings.OUTPUT_DIR / "fit_rel.json").read_text(encoding="utf-8"))['theta'] == 8

    def test_kmd_quality_needs_spectrum(self, run_cli):
        code, _, _ = run_cli("kmd-quality", "--system", "VanDerPol", "--theta", 5)
        assert code == 2

    def test_eigenvalues_only_for_custom(self, run_cli):
        code, _, _ = run_cli("fit", "--system", "LTI1a", "--eigenvalues", "0.5", "--theta", 3)
        assert code == 2

    def test_numerical_failure_exit_code(self, run_cli, monkeypatch):
        def degenerate(*args, **kwargs):
            raise DegenerateSpectrumError(1e-9, 1e-6)

        monkeypatch.setattr(cli, "fit_companion", degenerate)
        code, _, err = run_cli("fit", "--theta", 4)
        assert code == 3
        assert json.loads(err.strip().splitlines()[-1])['exit_code'] == 3

    def test_unexpected_error_exit_code(self, run_cli, monkeypatch):
        def boom(*args, **kwargs):
            raise RuntimeError("boom")

        monkeypatch.setattr(cli, "fit_companion", boom)
        code, _, err = run_cli("fit", "--theta", 4)
        assert code == 3
        assert "INTERNAL_ERROR" in err


# =========================
# Ensembles
# =========================

class TestSweepCommands:
    """sweep, denoise and sufficiency."""

    def test_sweep_from_config(self, run_cli, fixtures_dir, temp_output_dir):
        out = temp_output_dir / "sweep.csv"
        code, _, _ = run_cli("sweep", "--config", fixtures_dir / "sweep_config.json", "--out", out, "--serial")
        assert code == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "theta,delays,min,q1,median,q3,max,count"
        assert len(lines) == 4

    def test_sweep_is_reproducible(self, run_cli, fixtures_dir, temp_output_dir):
        a, b = temp_output_dir / "a.json", temp_output_dir / "b.json"
        run_cli("sweep", "--config", fixtures_dir / "sweep_config.json", "--out", a, "--serial")
        run_cli("sweep", "--config", fixtures_dir / "sweep_config.json", "--out", b, "--workers", 3)
        assert a.read_bytes() == b.read_bytes()

    def test_sweep_svg(self, run_cli, temp_output_dir):
        out = temp_output_dir / "plot.svg"
        code, _, _ = run_cli(
            "sweep", "--system", "LTI1b", "--theta", "2..9", "--delays", "0,6",
            "--ensemble", 3, "--out", out,
        )
        assert code == 0
        assert out.read_text(encoding="utf-8").lstrip().startswith("<?xml")

    def test_sweep_prints_json_without_out(self, run_cli):
        code, out, _ = run_cli(
            "sweep", "--theta", "3", "--delays", "6", "--ensemble", 2,
            "--indicator", "PrunedSpectrum", "--serial",
        )
        assert code == 0
        assert json.loads(out)['indicator'] == "PrunedSpectrum"

    def test_invalid_grid_is_config_error(self, run_cli):
        code, _, err = run_cli("sweep", "--theta", "0", "--ensemble", 2)
        assert code == 2
        assert json.loads(err.strip().splitlines()[-1])['error_code'] == "SWEEP_CONFIG_ERROR"

    def test_missing_config_file(self, run_cli, temp_output_dir):
        code, _, _ = run_cli("sweep", "--config", temp_output_dir / "nope.json")
        assert code == 2

    def test_metrics_written(self, run_cli, fixtures_dir, temp_output_dir):
        metrics = temp_output_dir / "kmdlab.prom"
        code, _, _ = run_cli(
            "sweep", "--config", fixtures_dir / "sweep_config.json",
            "--out", temp_output_dir / "r.csv", "--metrics-out", metrics,
        )
        assert code == 0
        assert "kmdlab_members_total" in metrics.read_text(encoding="utf-8")

    def test_denoise_compares_plain_and_tls(self, run_cli):
        code, out, _ = run_cli(
            "denoise", "--system", "LTI1a", "--theta", 10, "--delays", 6, "--noise-std", "1e-3",
            "--rank", 7, "--ensemble", 3, "--serial",
        )
        assert code == 0
        results = json.loads(out)
        assert set(results) == {"plain", "Tls"}
        assert results["Tls"]['indicator'] == "KmdQuality"

    def test_denoise_runs_share_trajectory_length(self, run_cli, monkeypatch):
        configs = []
        original = cli.run_sweep

        def recording(cfg, **kwargs):
            configs.append(cfg)
            return original(cfg, **kwargs)

        monkeypatch.setattr(cli, "run_sweep", recording)
        code, out, _ = run_cli(
            "denoise", "--system", "LTI1b", "--theta", 10, "--delays", 4, "--noise-std", "1e-3",
            "--denoiser", "NoiseResistant", "--ensemble", 2, "--serial",
        )
        assert code == 0
        assert set(json.loads(out)) == {"plain", "NoiseResistant"}
        plain, robust = configs
        assert plain.trajectory_length == robust.trajectory_length == 10 + 4 + 1 + 1 + 14 + 4

    def test_sweep_run_record(self, run_cli, fixtures_dir, temp_output_dir):
        record = temp_output_dir / "run.json"
        code, _, _ = run_cli(
            "sweep", "--config", fixtures_dir / "sweep_config.json", "--out", temp_output_dir / "r.csv",
            "--run-record", record, "--serial",
        )
        assert code == 0
        run = json.loads(record.read_text(encoding="utf-8"))
        assert run['status'] == "completed"
        assert run['completed'] == run['ensemble_size'] == len(run['members'])
        assert run['failed'] == 0

    def test_denoise_needs_noise(self, run_cli):
        code, _, _ = run_cli("denoise", "--theta", 10, "--rank", 7)
        assert code == 2

    def test_sufficiency(self, run_cli):
        code, out, _ = run_cli("sufficiency", "--system", "LTI1a", "--r-max", 8, "--ensemble", 3)
        assert code == 0
        report = json.loads(out)
        assert report['delays'] == 7
        assert report['jump_location'] == 7
