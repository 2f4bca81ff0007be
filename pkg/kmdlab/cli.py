"""
kmdlab command-line interface.

Subcommands print JSON reports on stdout (or write them with --out); logs go
to stderr. Exit codes: 0 success, 2 configuration or input error, 3 numerical
failure.
"""
import argparse
import json
import logging
import re
import sys
import uuid
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel

from kmdlab.config import Settings, validate_settings
from kmdlab.core.exceptions import (
    EXIT_NUMERICAL_FAILURE,
    EXIT_OK,
    ExportError,
    InvalidParameterError,
    KmdLabError,
    SweepConfigError,
)
from kmdlab.core.state import SweepState
from kmdlab.linalg.kernel import SvdThreshold
from kmdlab.models.domain import LtiSystem, MeanSubtract, TimeSeries
from kmdlab.models.enums import (
    ComplexCsvFormat,
    Denoiser,
    ExportFormat,
    IndicatorKind,
    KmdTarget,
    PipelineKind,
    SystemPreset,
)
from kmdlab.models.requests import NoiseSpec, SweepConfig, Tolerances, VdpConfig
from kmdlab.services.denoise import add_noise
from kmdlab.services.dft_diagnostics import fit_mean_subtracted, sufficiency_scan
from kmdlab.services.dmd_engine import fit_companion, fit_report
from kmdlab.services.ensemble_runner import derive_seed
from kmdlab.services.exporter import export_result
from kmdlab.services.spectral_pruning import kmd_quality, msub_efficacy, sigma_nontriv, target_spectrum
from kmdlab.services.sweep_service import SweepService, apply_pipeline, parse_config, run_sweep
from kmdlab.services.systems_lab import (
    export_csv,
    ingest_csv,
    lti_trajectory,
    make_lti,
    normalize_complex_text,
    vdp_trajectory,
)
from kmdlab.utils.logger import configure_logging
from kmdlab.utils.metrics import write_metrics

logger = logging.getLogger(__name__)

RANGE_TOKEN = re.compile(r"^(\d+)\.\.(\d+)$")


# =========================
# Argument parsing
# =========================

def parse_int_list(text: str) -> List[int]:
    """Parse ``"2..12"``, ``"0,3,6"`` or mixtures such as ``"2..6,10"``."""
    values: List[int] = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        match = RANGE_TOKEN.match(token)
        if match:
            low, high = int(match.group(1)), int(match.group(2))
            if low > high:
                raise argparse.ArgumentTypeError(f"empty range '{token}'")
            values.extend(range(low, high + 1))
        elif token.isdigit():
            values.append(int(token))
        else:
            raise argparse.ArgumentTypeError(f"'{token}' is neither an integer nor a range a..b")
    if not values:
        raise argparse.ArgumentTypeError("no values given")
    return sorted(set(values))


def parse_complex(text: str) -> complex:
    try:
        return complex(normalize_complex_text(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a complex number")


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--log-level", default=None, help="Override KMDLAB_LOG_LEVEL")
    parser.add_argument("--metrics-out", type=Path, default=None, help="Write prometheus text metrics here")
    parser.add_argument("--out", type=Path, default=None, help="Output file (stdout when omitted)")
    parser.add_argument("--tol", type=float, default=None, help="Relative SVD cutoff")


def _add_source(parser: argparse.ArgumentParser, inputs: bool = True):
    if inputs:
        parser.add_argument("--input", type=Path, nargs="+", default=None,
                            help="Time series CSV (rows observables, columns snapshots)")
        parser.add_argument("--complex-format", type=ComplexCsvFormat, default=None,
                            choices=list(ComplexCsvFormat))
    parser.add_argument("--system", type=SystemPreset, default=SystemPreset.LTI1A,
                        choices=list(SystemPreset))
    parser.add_argument("--eigenvalues", type=parse_complex, nargs="+", default=None,
                        help="Spectrum of a Custom system, e.g. 0.9+0.1i 0.9-0.1i")
    parser.add_argument("--observables", type=int, default=1, help="Dictionary size m")
    parser.add_argument("--full-rank", action="store_true", help="Redraw the dictionary until rank r")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--noise-std", type=float, default=0.0)


def _add_model(parser: argparse.ArgumentParser, theta_default: Optional[str] = None):
    parser.add_argument("--theta", type=parse_int_list, default=theta_default,
                        help="Companion order(s), e.g. 10 or 2..12")
    parser.add_argument("--delays", type=parse_int_list, default=[0], help="Delay count(s)")
    parser.add_argument("--pipeline", type=PipelineKind, default=PipelineKind.RAW,
                        choices=list(PipelineKind))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kmdlab",
        description="Companion-matrix DMD diagnostics: DFT equivalence, mode-norm pruning and KMD-Quality.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Emit a trajectory CSV")
    _add_common(p)
    _add_source(p, inputs=False)
    p.add_argument("--length", type=int, required=True, help="Number of snapshots")
    p.add_argument("--complex-format", type=ComplexCsvFormat, default=None, choices=list(ComplexCsvFormat))

    p = sub.add_parser("fit", help="Single companion DMD fit report")
    _add_common(p)
    _add_source(p)
    _add_model(p)

    p = sub.add_parser("dft-distance", help="Relative distance of mean-subtracted DMD to the DFT")
    _add_common(p)
    _add_source(p)
    _add_model(p)

    p = sub.add_parser("prune", help="Split the DMD spectrum by mode norm")
    _add_common(p)
    _add_source(p)
    _add_model(p)

    p = sub.add_parser("kmd-quality", help="KMD-Quality against the true spectrum")
    _add_common(p)
    _add_source(p)
    _add_model(p)
    p.add_argument("--target", type=KmdTarget, default=KmdTarget.SIGMA, choices=list(KmdTarget))

    for name, help_text in (
        ("sweep", "Ensemble sweep over (θ, d)"),
        ("denoise", "Ensemble KMD-Quality of plain against denoised DMD"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        _add_source(p, inputs=False)
        _add_model(p, theta_default="2..12")
        p.add_argument("--config", type=Path, default=None, help="JSON sweep config (schema v1)")
        p.add_argument("--ensemble", type=int, default=10)
        p.add_argument("--target", type=KmdTarget, default=KmdTarget.SIGMA, choices=list(KmdTarget))
        p.add_argument("--rank", type=int, default=None, help="TLS rank")
        p.add_argument("--filter-width", type=int, default=None)
        p.add_argument("--workers", type=int, default=None, help="Override KMDLAB_WORKERS")
        p.add_argument("--serial", action="store_true", help="Evaluate members in one thread")
        if name == "sweep":
            p.add_argument("--indicator", type=IndicatorKind, default=IndicatorKind.DFT_DISTANCE,
                           choices=list(IndicatorKind))
            p.add_argument("--denoiser", type=Denoiser, default=Denoiser.PLAIN, choices=list(Denoiser))
            p.add_argument("--format", type=ExportFormat, default=None, choices=list(ExportFormat))
            p.add_argument("--log-scale", action=argparse.BooleanOptionalAction, default=None)
            p.add_argument("--run-record", type=Path, default=None,
                           help="Write the run record (status, member outcomes, log) as JSON")
        else:
            p.add_argument("--denoiser", type=Denoiser, default=Denoiser.TLS,
                           choices=[Denoiser.TLS, Denoiser.NOISE_RESISTANT])

    p = sub.add_parser("sufficiency", help="Scan the DFT distance over θ at d = r_max - 1")
    _add_common(p)
    _add_source(p)
    p.add_argument("--theta", type=parse_int_list, default=None, help="Companion orders (default 2..r_max+2)")
    p.add_argument("--r-max", type=int, required=True, help="Largest system order assumed")
    p.add_argument("--ensemble", type=int, default=10)

    return parser


# =========================
# Helpers
# =========================

def _tolerances(settings: Settings, args) -> Tolerances:
    tols = Tolerances.from_settings(settings)
    if args.tol is not None:
        tols = tols.model_copy(update={'svd_relative_tol': args.tol})
    return tols


def _emit(payload: Any, out: Optional[Path]):
    """Print or write a JSON payload."""
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps(_jsonable(payload), indent=2)
    if out is None:
        print(text)
        return
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n", encoding="utf-8")
    except OSError as e:
        raise ExportError(str(out), str(e))
    logger.info(f"Wrote {out}")


def _jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _system(args) -> Optional[LtiSystem]:
    if args.eigenvalues and args.system is not SystemPreset.CUSTOM:
        raise InvalidParameterError("--eigenvalues", args.system.value, "only accepted with --system Custom")
    if args.system is SystemPreset.VAN_DER_POL:
        return None
    return make_lti(
        args.system,
        m=args.observables,
        full_rank_dictionary=args.full_rank,
        seed=args.seed,
        eigenvalues=args.eigenvalues,
    )


def _trajectory(args, length: int) -> Tuple[TimeSeries, Optional[LtiSystem]]:
    """A generated trajectory with optional noise."""
    system = _system(args)
    if system is None:
        Z = vdp_trajectory(VdpConfig(num_samples=length))
    else:
        Z = lti_trajectory(system, length)
    if args.noise_std > 0.0:
        Z = add_noise(Z, NoiseSpec(std_dev=args.noise_std, seed=derive_seed(args.seed, 1)))
    return Z, system


def _source(args, length: int) -> Tuple[TimeSeries, Optional[LtiSystem]]:
    """The --input series, or a generated one, cut to its first ``length`` columns."""
    if getattr(args, "input", None):
        if len(args.input) != 1:
            raise InvalidParameterError("--input", len(args.input), "this command takes one file")
        Z = ingest_csv(args.input[0], args.complex_format)
        system = None
        if args.eigenvalues:
            # Known spectrum of the recorded data; the dictionary is not used
            system = make_lti(SystemPreset.CUSTOM, m=Z.num_observables, seed=args.seed, eigenvalues=args.eigenvalues)
        if length > Z.num_snapshots:
            raise InvalidParameterError(
                "--theta", length - 1, f"needs {length} snapshots but {args.input[0]} has {Z.num_snapshots}"
            )
        return Z.window(0, length), system
    return _trajectory(args, length)


def _cells(args) -> List[Tuple[int, int]]:
    if not args.theta:
        raise InvalidParameterError("--theta", None, "required for this command")
    return [(theta, d) for d in args.delays for theta in args.theta]


def _one_or_many(reports: List[Any]) -> Any:
    return reports[0] if len(reports) == 1 else reports


# =========================
# Commands
# =========================

def cmd_simulate(args, settings: Settings) -> int:
    Z, _ = _trajectory(args, args.length)
    if args.out is None:
        raise InvalidParameterError("--out", None, "simulate writes a CSV file")
    export_csv(Z, args.out, args.complex_format)
    logger.info(f"Simulated {Z.num_observables}x{Z.num_snapshots} {args.system.value} trajectory")
    return EXIT_OK


def _fit_cells(args, settings: Settings, with_kept: bool) -> int:
    tols = _tolerances(settings, args)
    tol = SvdThreshold(tols.svd_relative_tol)
    reports = []
    for theta, d in _cells(args):
        Z, system = _source(args, theta + d + 1)
        Z_used = apply_pipeline(Z, d, args.pipeline)
        model = fit_companion(Z_used, tol, tols.eigen_separation_tol)
        kept = None
        if with_kept:
            kept = sigma_nontriv(model, Z_used, tols.mode_norm_rel_tol).kept.values
        reports.append(fit_report(model, Z_used, system.r if system else None, kept))
    _emit(_one_or_many(reports), args.out)
    return EXIT_OK


def cmd_fit(args, settings: Settings) -> int:
    return _fit_cells(args, settings, with_kept=False)


def cmd_prune(args, settings: Settings) -> int:
    return _fit_cells(args, settings, with_kept=True)


def cmd_dft_distance(args, settings: Settings) -> int:
    tols = _tolerances(settings, args)
    reports = []
    for theta, d in _cells(args):
        Z, _ = _source(args, theta + d + 1)
        _, report = fit_mean_subtracted(
            Z, d, SvdThreshold(tols.svd_relative_tol), tols.decision_tol, tols.eigen_separation_tol
        )
        reports.append(report)
    _emit(_one_or_many(reports), args.out)
    return EXIT_OK


def _log_msub_prediction(system: LtiSystem, Z: TimeSeries, Z_used: TimeSeries, settings: Settings):
    """Log whether mean subtraction is expected to remove the eigenvalue 1."""
    efficacy = msub_efficacy(system.eigenvalues, settings.P_MAX, settings.ROOT_OF_UNITY_TOL)
    # ms>delay averages the raw window, delay>ms the delayed columns
    length = Z.num_snapshots if isinstance(Z_used.pipeline.steps[0], MeanSubtract) else Z_used.num_snapshots
    if efficacy.succeeds_at(length):
        logger.info(f"Mean subtraction over {length} snapshots removes 1 (p*={efficacy.p_star}): use target SigmaMinusOne")
    else:
        logger.info(f"Mean subtraction over {length} snapshots keeps or adds 1 (p*={efficacy.p_star}): use target SigmaPlusOne")


def cmd_kmd_quality(args, settings: Settings) -> int:
    tols = _tolerances(settings, args)
    reports = []
    for theta, d in _cells(args):
        Z, system = _source(args, theta + d + 1)
        if system is None:
            raise InvalidParameterError(
                "--system", args.system.value, "KMD-Quality needs a known spectrum (LTI preset or --eigenvalues)"
            )
        Z_used = apply_pipeline(Z, d, args.pipeline)
        if Z_used.pipeline.mean_subtracted:
            _log_msub_prediction(system, Z, Z_used, settings)
        model = fit_companion(Z_used, SvdThreshold(tols.svd_relative_tol), tols.eigen_separation_tol)
        B = target_spectrum(system.eigenvalues, args.target)
        reports.append(kmd_quality(Z_used, B, model.c_star, tols.eigen_match_tol, tols.eigen_separation_tol))
    _emit(_one_or_many(reports), args.out)
    return EXIT_OK


def _load_config_file(path: Path) -> Dict[str, Any]:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise SweepConfigError(f"Cannot read config {path}: {e}", details={'path': str(path)})
    except json.JSONDecodeError as e:
        raise SweepConfigError(f"Config {path} is not valid JSON: {e}", details={'path': str(path)})


def _system_spec(args, length: int) -> Dict[str, Any]:
    """SystemSpec mapping from the source flags; Van der Pol records ``length`` samples at least."""
    system: Dict[str, Any] = {
        'preset': args.system,
        'seed': args.seed,
        'observables': args.observables,
        'full_rank_dictionary': args.full_rank,
    }
    if args.eigenvalues:
        system['eigenvalues'] = [(v.real, v.imag) for v in args.eigenvalues]
    if args.system is SystemPreset.VAN_DER_POL:
        system['vdp'] = VdpConfig(num_samples=max(VdpConfig().num_samples, length))
    return system


def _config_from_args(args, settings: Settings, **overrides) -> SweepConfig:
    if args.config is not None:
        return parse_config(_load_config_file(args.config))

    filter_width = args.filter_width or settings.FILTER_WIDTH
    length = max(args.theta) + 2 * max(args.delays) + 2 + filter_width

    data: Dict[str, Any] = {
        'system': _system_spec(args, length),
        'theta_values': args.theta,
        'delay_values': args.delays,
        'ensemble_size': args.ensemble,
        'kmd_target': args.target,
        'pipeline': args.pipeline,
        'tolerances': _tolerances(settings, args),
        'tls_rank': args.rank,
        'filter_width': filter_width,
        'output_path': args.out,
    }
    if args.noise_std > 0.0:
        data['noise'] = {'std_dev': args.noise_std, 'seed': args.seed}
    data.update(overrides)
    return parse_config(data)


def cmd_sweep(args, settings: Settings) -> int:
    cfg = _config_from_args(args, settings, indicator=args.indicator, denoiser=args.denoiser)
    state = SweepState(uuid.uuid4().hex[:12], cfg.ensemble_size, cfg.system.seed)
    try:
        result = run_sweep(cfg, workers=args.workers, serial=args.serial, state=state)
    finally:
        if args.run_record is not None:
            _emit(state.to_dict(), settings.get_output_path(args.run_record))

    out = args.out or cfg.output_path
    if out is None:
        print(result.model_dump_json(indent=2))
    else:
        export_result(result, settings.get_output_path(out), args.format, args.log_scale)
    return EXIT_OK


def cmd_denoise(args, settings: Settings) -> int:
    if args.noise_std <= 0.0 and args.config is None:
        raise InvalidParameterError("--noise-std", args.noise_std, "denoising needs noisy data")
    cfg = _config_from_args(args, settings, indicator=IndicatorKind.KMD_QUALITY, denoiser=args.denoiser)
    # Both runs draw the filter window so their members share noisy trajectories
    denoised_cfg = parse_config({**cfg.model_dump(), 'reserve_filter_window': True})
    plain_cfg = parse_config({
        **denoised_cfg.model_dump(), 'denoiser': Denoiser.PLAIN, 'tls_rank': None,
    })

    results = {
        'plain': run_sweep(plain_cfg, workers=args.workers, serial=args.serial),
        denoised_cfg.denoiser.value: run_sweep(denoised_cfg, workers=args.workers, serial=args.serial),
    }
    _emit(results, args.out)
    return EXIT_OK


def cmd_sufficiency(args, settings: Settings) -> int:
    tols = _tolerances(settings, args)
    thetas = args.theta or list(range(2, args.r_max + 3))
    d = args.r_max - 1

    if args.input:
        ensemble: Sequence[TimeSeries] = [ingest_csv(p, args.complex_format) for p in args.input]
    else:
        data: Dict[str, Any] = {
            'system': _system_spec(args, max(thetas) + d + 1),
            'theta_values': thetas,
            'delay_values': [d],
            'ensemble_size': args.ensemble,
        }
        if args.noise_std > 0.0:
            data['noise'] = {'std_dev': args.noise_std, 'seed': args.seed}
        service = SweepService(parse_config(data), runner=None)
        ensemble = []
        for i in range(args.ensemble):
            seed = derive_seed(args.seed, i)
            clean, _ = service.member_trajectory(seed)
            ensemble.append(service.noisy(clean, seed))

    report = sufficiency_scan(
        ensemble, args.r_max, thetas,
        SvdThreshold(tols.svd_relative_tol), tols.decision_tol,
        settings.JUMP_FACTOR, settings.JUMP_FLOOR,
    )
    _emit(report, args.out)
    return EXIT_OK


COMMANDS = {
    'simulate': cmd_simulate,
    'fit': cmd_fit,
    'dft-distance': cmd_dft_distance,
    'prune': cmd_prune,
    'kmd-quality': cmd_kmd_quality,
    'sweep': cmd_sweep,
    'denoise': cmd_denoise,
    'sufficiency': cmd_sufficiency,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)

    try:
        settings = validate_settings()
        if args.log_level:
            settings = settings.model_copy(update={'LOG_LEVEL': args.log_level.upper()})
        configure_logging(
            log_level=settings.LOG_LEVEL,
            log_dir=settings.LOG_DIR,
            max_bytes=settings.LOG_FILE_MAX_BYTES,
            backup_count=settings.LOG_FILE_BACKUP_COUNT,
        )
        logger.debug(f"kmdlab {settings.VERSION}: {args.command}")
        if args.out is not None:
            args.out = settings.get_output_path(args.out)

        code = COMMANDS[args.command](args, settings)
        if args.metrics_out:
            write_metrics(args.metrics_out)
        return code

    except KmdLabError as e:
        logger.error(f"{e.error_code}: {e.message}")
        print(json.dumps(e.to_dict(), default=str), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        print(json.dumps({'error': str(e), 'error_code': 'INTERNAL_ERROR',
                          'exit_code': EXIT_NUMERICAL_FAILURE}), file=sys.stderr)
        return EXIT_NUMERICAL_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
