"""
Service layer for kmdlab.

Companion DMD fitting, preprocessing, DFT diagnostics, spectral pruning,
de-noising, test systems and the ensemble sweep harness.
"""

from kmdlab.services.denoise import add_noise, noise_resistant_companion, tls_companion
from kmdlab.services.dft_diagnostics import (
    equivalence_via_projection,
    fit_mean_subtracted,
    sufficiency_scan,
)
from kmdlab.services.dmd_engine import fit_companion, forecast, reconstruct
from kmdlab.services.ensemble_runner import EnsembleRunner, derive_seed
from kmdlab.services.exporter import export_result, load_result
from kmdlab.services.preprocess import delay_embed, delay_then_ms, mean_subtract, ms_then_delay
from kmdlab.services.spectral_pruning import (
    closest_superset_companion,
    delta_trivial,
    kmd_quality,
    msub_efficacy,
    rho_subset,
    sigma_nontriv,
)
from kmdlab.services.sweep_service import run_sweep
from kmdlab.services.systems_lab import ingest_csv, lti_trajectory, make_lti, vdp_trajectory

__all__ = [
    # Companion DMD
    'fit_companion',
    'reconstruct',
    'forecast',
    # Preprocessing
    'mean_subtract',
    'delay_embed',
    'ms_then_delay',
    'delay_then_ms',
    # DFT diagnostics
    'fit_mean_subtracted',
    'equivalence_via_projection',
    'sufficiency_scan',
    # Pruning and KMD-Quality
    'sigma_nontriv',
    'rho_subset',
    'closest_superset_companion',
    'delta_trivial',
    'kmd_quality',
    'msub_efficacy',
    # De-noising
    'add_noise',
    'tls_companion',
    'noise_resistant_companion',
    # Systems
    'make_lti',
    'lti_trajectory',
    'vdp_trajectory',
    'ingest_csv',
    # Sweeps
    'EnsembleRunner',
    'derive_seed',
    'run_sweep',
    'export_result',
    'load_result',
]
