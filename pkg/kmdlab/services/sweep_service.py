"""
Ensemble parameter sweeps over (θ, d).

Every ensemble member draws one trajectory long enough for the largest grid
cell, then evaluates the configured indicator on the first θ + d + 1
snapshots for each (θ, d). Per-cell values are aggregated into five-number
summaries once every member has finished.
"""
import logging
import uuid
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError

from kmdlab.config import get_settings
from kmdlab.core.exceptions import KmdLabError, NumericalError, SweepConfigError
from kmdlab.core.state import SweepState
from kmdlab.linalg.kernel import SvdThreshold
from kmdlab.models.domain import LtiSystem, TimeSeries
from kmdlab.models.enums import Denoiser, IndicatorKind, PipelineKind
from kmdlab.models.requests import NoiseSpec, SweepConfig
from kmdlab.models.responses import CellStats, SweepResult
from kmdlab.services.denoise import add_noise, noise_resistant_series, tls_series
from kmdlab.services.dft_diagnostics import fit_mean_subtracted
from kmdlab.services.dmd_engine import fit_companion
from kmdlab.services.ensemble_runner import EnsembleRunner, derive_seed
from kmdlab.services.preprocess import delay_embed, delay_then_ms, ms_then_delay
from kmdlab.services.spectral_pruning import kmd_quality, sigma_nontriv, target_spectrum
from kmdlab.services.systems_lab import (
    lti_trajectory,
    make_lti,
    redraw_observation,
    vdp_trajectory,
)

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]

# Van der Pol members start anywhere in this square
VDP_INITIAL_BOX = 2.0

# Sub-stream indices under a member seed
_NOISE_STREAM = 1
_VDP_STREAM = 2

_FIT_KIND = {
    Denoiser.PLAIN: "plain",
    Denoiser.TLS: "tls",
    Denoiser.NOISE_RESISTANT: "noise_resistant",
}


def parse_config(data: Union[SweepConfig, Dict[str, Any]]) -> SweepConfig:
    """
    Validate a raw config mapping.

    Raises:
        SweepConfigError: The mapping is not a valid v1 sweep config
    """
    if isinstance(data, SweepConfig):
        return data
    try:
        return SweepConfig.model_validate(data)
    except ValidationError as e:
        errors = [
            {'field': ".".join(str(p) for p in err["loc"]), 'message': err["msg"]}
            for err in e.errors()
        ]
        raise SweepConfigError("Invalid sweep configuration", details={'errors': errors})


def apply_pipeline(Z: TimeSeries, d: int, pipeline: PipelineKind) -> TimeSeries:
    """Preprocess a cell window with d delays."""
    pipeline = PipelineKind(pipeline)
    if pipeline is PipelineKind.MS_THEN_DELAY:
        return ms_then_delay(Z, d)
    if pipeline is PipelineKind.DELAY_THEN_MS:
        return delay_then_ms(Z, d)
    return delay_embed(Z, d)


class SweepService:
    """
    Runs one sweep configuration over its ensemble.

    The base LTI system (spectrum) is built once from the system seed; each
    member redraws the dictionary and initial state from its own seed.
    """

    def __init__(self, cfg: SweepConfig, runner: EnsembleRunner):
        self.cfg = cfg
        self.runner = runner
        self.tol = SvdThreshold(cfg.tolerances.svd_relative_tol)
        self.base_system: Optional[LtiSystem] = None
        if cfg.system.preset.is_lti:
            self.base_system = make_lti(
                cfg.system.preset,
                m=cfg.system.observables,
                full_rank_dictionary=cfg.system.full_rank_dictionary,
                seed=cfg.system.seed,
                eigenvalues=cfg.system.eigenvalue_array() if cfg.system.eigenvalues else None,
            )
        if cfg.indicator is IndicatorKind.KMD_QUALITY:
            self._check_target_fits()

    def _check_target_fits(self):
        """A companion of order θ holds at most θ eigenvalues, so every θ must reach #B."""
        target = target_spectrum(self.base_system.eigenvalues, self.cfg.kmd_target)
        too_small = [theta for theta in self.cfg.theta_values if theta < len(target)]
        if too_small:
            raise SweepConfigError(
                f"KmdQuality with target {self.cfg.kmd_target.value} needs θ ≥ {len(target)}, "
                f"got θ = {too_small}",
                details={'theta_values': too_small, 'target_size': len(target)},
            )

    # =========================
    # Trajectories
    # =========================

    def member_trajectory(self, seed: int) -> Tuple[TimeSeries, Optional[LtiSystem]]:
        """Clean trajectory of the configured length for one member."""
        length = self.cfg.trajectory_length
        if self.base_system is not None:
            system = redraw_observation(self.base_system, seed, self.cfg.system.full_rank_dictionary)
            return lti_trajectory(system, length), system

        rng = np.random.default_rng(derive_seed(seed, _VDP_STREAM))
        x0, y0 = rng.uniform(-VDP_INITIAL_BOX, VDP_INITIAL_BOX, size=2)
        vdp = self.cfg.system.vdp.model_copy(update={'initial': (float(x0), float(y0))})
        weights = rng.uniform(0.5, 1.5, size=(1, 2)) * rng.choice([-1.0, 1.0], size=(1, 2))
        return vdp_trajectory(vdp, weights).window(0, length), None

    def noisy(self, Z: TimeSeries, seed: int) -> TimeSeries:
        if self.cfg.noise is None:
            return Z
        spec = NoiseSpec(
            distribution=self.cfg.noise.distribution,
            std_dev=self.cfg.noise.std_dev,
            seed=derive_seed(seed, _NOISE_STREAM),
        )
        return add_noise(Z, spec)

    # =========================
    # Indicators
    # =========================

    def _denoised_series(self, Z: TimeSeries, theta: int, d: int) -> TimeSeries:
        cfg = self.cfg
        cell = Z.window(0, theta + d + 1)

        if cfg.denoiser is Denoiser.NOISE_RESISTANT:
            start = theta + d + 2
            Z_filter = Z.window(start, start + cfg.filter_width + d)
            return noise_resistant_series(cell, Z_filter, d)

        Z_used = apply_pipeline(cell, d, cfg.pipeline)
        if cfg.denoiser is Denoiser.TLS:
            rank = min(cfg.tls_rank, min(Z_used.data.shape))
            Z_used = tls_series(Z_used, rank)
        return Z_used

    def indicator(self, Z: TimeSeries, system: Optional[LtiSystem], theta: int, d: int) -> float:
        """Indicator value of one member at one grid cell."""
        cfg = self.cfg
        tols = cfg.tolerances

        if cfg.indicator is IndicatorKind.DFT_DISTANCE:
            _, report = fit_mean_subtracted(
                Z.window(0, theta + d + 1), d, self.tol, tols.decision_tol, tols.eigen_separation_tol
            )
            return report.distance

        Z_used = self._denoised_series(Z, theta, d)
        model = fit_companion(Z_used, self.tol, tols.eigen_separation_tol, kind=_FIT_KIND[cfg.denoiser])

        if cfg.indicator is IndicatorKind.KMD_QUALITY:
            B = target_spectrum(system.eigenvalues, cfg.kmd_target)
            report = kmd_quality(Z_used, B, model.c_star, tols.eigen_match_tol, tols.eigen_separation_tol)
            return report.quality

        pruned = sigma_nontriv(model, Z_used, tols.mode_norm_rel_tol)
        return float(len(pruned.kept))

    def evaluate_member(self, index: int, seed: int) -> Dict[Cell, Optional[float]]:
        """
        All grid cells for one member.

        A numerical failure in one cell drops that cell for this member only;
        anything else fails the whole member.
        """
        clean, system = self.member_trajectory(seed)
        Z = self.noisy(clean, seed)

        values: Dict[Cell, Optional[float]] = {}
        for theta, d in self.cfg.cells:
            try:
                values[(theta, d)] = self.indicator(Z, system, theta, d)
            except NumericalError as e:
                logger.warning(f"Member {index}: cell θ={theta}, d={d} skipped: {e.message}")
                values[(theta, d)] = None
        return values

    # =========================
    # Run
    # =========================

    def run(self, state: Optional[SweepState] = None) -> SweepResult:
        cfg = self.cfg
        outcomes = self.runner.run(self.evaluate_member, cfg.ensemble_size, cfg.system.seed, state)

        failed_members = 0
        skipped_values = 0
        samples: Dict[Cell, List[float]] = {cell: [] for cell in cfg.cells}
        for index, (values, error) in enumerate(outcomes):
            if error is not None:
                failed_members += 1
                continue
            skipped = [cell for cell, value in values.items() if value is None]
            if skipped:
                failed_members += 1
                skipped_values += len(skipped)
                if state:
                    state.add_log(f"Member {index}: cells (θ, d) {skipped} skipped", "WARNING")
            for cell, value in values.items():
                if value is not None:
                    samples[cell].append(value)

        cells = []
        for theta, d in cfg.cells:
            if not samples[(theta, d)]:
                first_error = next((e for _, e in outcomes if e is not None), None)
                if isinstance(first_error, KmdLabError):
                    raise first_error
                raise NumericalError(
                    f"No ensemble member produced a value at θ={theta}, d={d}",
                    details={'theta': theta, 'delays': d, 'failed_members': failed_members},
                )
            cells.append(CellStats.from_samples(theta, d, samples[(theta, d)]))

        return SweepResult(
            indicator=cfg.indicator,
            kmd_target=cfg.kmd_target if cfg.indicator is IndicatorKind.KMD_QUALITY else None,
            pipeline=cfg.pipeline,
            system=cfg.system.preset.value,
            seed=cfg.system.seed,
            ensemble_size=cfg.ensemble_size,
            cells=cells,
            failed_members=failed_members,
            skipped_values=skipped_values,
        )


def run_sweep(
    cfg: Union[SweepConfig, Dict[str, Any]],
    workers: Optional[int] = None,
    serial: bool = False,
    state: Optional[SweepState] = None,
) -> SweepResult:
    """
    Run a sweep end to end.

    Args:
        cfg: SweepConfig or its JSON mapping
        workers: Worker threads (defaults to settings WORKERS)
        serial: Evaluate members in the calling thread
        state: Optional run record updated while members finish

    Raises:
        SweepConfigError: Invalid config, reported before any computation
    """
    cfg = parse_config(cfg)
    state = state or SweepState(uuid.uuid4().hex[:12], cfg.ensemble_size, cfg.system.seed)
    logger.info(
        f"Sweep {state.run_id}: {cfg.indicator.value} on {cfg.system.preset.value}, "
        f"θ={cfg.theta_values}, d={cfg.delay_values}, ensemble={cfg.ensemble_size}, "
        f"trajectory length {cfg.trajectory_length}"
    )

    runner = EnsembleRunner(max_workers=workers or get_settings().WORKERS, serial=serial)
    state.set_running()
    try:
        with runner:
            result = SweepService(cfg, runner).run(state)
    except Exception as e:
        state.set_failed(str(e))
        logger.error(f"Sweep {state.run_id} failed: {e}")
        raise

    state.set_completed()
    logger.info(
        f"Sweep {state.run_id} completed in {state.duration_sec:.2f}s: "
        f"{len(result.cells)} cells, {state.completed_count} members completed, "
        f"{result.failed_members} with failures, {result.skipped_values} values skipped"
    )
    return result
