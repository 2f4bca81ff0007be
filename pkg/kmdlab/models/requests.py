"""Input models for kmdlab sweeps, systems and noise."""

from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from kmdlab.models.enums import (
    Denoiser,
    IndicatorKind,
    KmdTarget,
    NoiseDistribution,
    PipelineKind,
    SystemPreset,
)

# Complex numbers travel through JSON as [re, im] pairs
ComplexPair = Tuple[float, float]


class Tolerances(BaseModel):
    """Numerical cutoffs applied throughout a run."""

    svd_relative_tol: float = Field(1e-8, gt=0.0, lt=1.0, description="Relative SVD cutoff")
    decision_tol: float = Field(1e-6, gt=0.0, lt=1.0, description="DFT-equivalence cutoff")
    mode_norm_rel_tol: float = Field(1e-8, gt=0.0, lt=1.0, description="Relative mode norm cutoff")
    eigen_match_tol: float = Field(1e-6, gt=0.0, lt=1.0, description="Eigenvalue matching radius")
    eigen_separation_tol: float = Field(1e-6, gt=0.0, lt=1.0)

    @classmethod
    def from_settings(cls, settings) -> "Tolerances":
        """Build tolerances from a Settings instance."""
        return cls(
            svd_relative_tol=settings.SVD_RELATIVE_TOL,
            decision_tol=settings.DECISION_TOL,
            mode_norm_rel_tol=settings.MODE_NORM_REL_TOL,
            eigen_match_tol=settings.EIGEN_MATCH_TOL,
            eigen_separation_tol=settings.EIGEN_SEPARATION_TOL,
        )


class NoiseSpec(BaseModel):
    """
    Additive sensor noise.

    Uniform noise with support [-σ√3, σ√3] so that its standard deviation is
    exactly ``std_dev``.
    """

    distribution: NoiseDistribution = Field(NoiseDistribution.UNIFORM_ZERO_MEAN)
    std_dev: float = Field(..., ge=0.0, description="Noise standard deviation σ")
    seed: int = Field(0, ge=0, description="Noise generator seed")


class VdpConfig(BaseModel):
    """Fixed-step sampling of the Van der Pol flow map."""

    initial: Tuple[float, float] = Field((0.1, 0.0), description="Initial state (υ₁, υ₂)")
    dt: float = Field(0.01, gt=0.0, description="RK4 step; 0.01 or smaller keeps the scheme stable")
    sample_stride: int = Field(10, ge=1, description="Integrator steps per observation")
    num_samples: int = Field(200, ge=2, description="Snapshots recorded")
    burn_in_steps: int = Field(0, ge=0, description="Integrator steps discarded before sampling")
    mu: float = Field(1.0, gt=0.0, description="Damping parameter")

    @property
    def observation_interval(self) -> float:
        return self.dt * self.sample_stride


class SystemSpec(BaseModel):
    """Which test system a sweep draws its trajectories from."""

    preset: SystemPreset = Field(SystemPreset.LTI1A)
    seed: int = Field(0, ge=0, description="Master seed")
    observables: int = Field(1, ge=1, le=512, description="Dictionary size m")
    full_rank_dictionary: bool = Field(False, description="Require rank(C̃) = r")
    eigenvalues: Optional[List[ComplexPair]] = Field(
        None,
        description="Custom spectrum as [re, im] pairs"
    )
    vdp: Optional[VdpConfig] = Field(None, description="Van der Pol sampling")

    @model_validator(mode="after")
    def check_preset_fields(self) -> "SystemSpec":
        if self.preset is SystemPreset.CUSTOM and not self.eigenvalues:
            raise ValueError("Custom systems need a non-empty 'eigenvalues' list")
        if self.preset is not SystemPreset.CUSTOM and self.eigenvalues:
            raise ValueError(f"'eigenvalues' is only accepted with preset Custom, not {self.preset.value}")
        if self.preset is SystemPreset.VAN_DER_POL and self.vdp is None:
            self.vdp = VdpConfig()
        return self

    def eigenvalue_array(self):
        """Custom eigenvalues as a complex numpy array."""
        return np.array([complex(re, im) for re, im in self.eigenvalues or []], dtype=np.complex128)


class SweepConfig(BaseModel):
    """
    One (θ, d) sweep over an ensemble of trajectories.

    Each member draws a trajectory of θ_max + d_max + 1 snapshots (plus the
    filter window for noise-resistant DMD) and the indicator is evaluated on
    the first θ + d + 1 of them for every grid cell.
    """

    schema_version: Literal["v1"] = "v1"
    system: SystemSpec = Field(default_factory=SystemSpec)
    theta_values: List[int] = Field(..., min_length=1, description="Companion orders θ")
    delay_values: List[int] = Field([0], min_length=1, description="Delay counts d")
    ensemble_size: int = Field(10, ge=1, le=100000)
    indicator: IndicatorKind = Field(IndicatorKind.DFT_DISTANCE)
    kmd_target: KmdTarget = Field(KmdTarget.SIGMA, description="Target set for KmdQuality")
    pipeline: PipelineKind = Field(
        PipelineKind.RAW,
        description="Preprocessing for KmdQuality and PrunedSpectrum; DftDistance always delays then centres"
    )
    tolerances: Tolerances = Field(default_factory=Tolerances)

    # Noise study
    noise: Optional[NoiseSpec] = Field(None)
    denoiser: Denoiser = Field(Denoiser.PLAIN)
    tls_rank: Optional[int] = Field(None, ge=1)
    filter_width: int = Field(14, ge=2)
    reserve_filter_window: bool = Field(
        False,
        description="Draw the filter window for every denoiser so baselines see the same noisy trajectories"
    )

    output_path: Optional[Path] = Field(None, description="Where the result is exported")

    @field_validator("theta_values")
    @classmethod
    def validate_thetas(cls, v: List[int]) -> List[int]:
        if any(t < 1 for t in v):
            raise ValueError("Companion orders must be at least 1")
        return sorted(set(v))

    @field_validator("delay_values")
    @classmethod
    def validate_delays(cls, v: List[int]) -> List[int]:
        if any(d < 0 for d in v):
            raise ValueError("Delay counts must be non-negative")
        return sorted(set(v))

    @model_validator(mode="after")
    def check_consistency(self) -> "SweepConfig":
        known_spectrum = self.system.preset is not SystemPreset.VAN_DER_POL
        if self.indicator is IndicatorKind.KMD_QUALITY and not known_spectrum:
            raise ValueError("KmdQuality needs a system with a known spectrum")
        if self.denoiser is Denoiser.TLS and self.tls_rank is None:
            raise ValueError("The Tls denoiser needs 'tls_rank'")
        if self.denoiser is not Denoiser.PLAIN and self.indicator is IndicatorKind.DFT_DISTANCE:
            raise ValueError("Denoisers apply to KmdQuality and PrunedSpectrum sweeps only")
        if self.denoiser is Denoiser.NOISE_RESISTANT and self.pipeline is not PipelineKind.RAW:
            raise ValueError("The NoiseResistant denoiser runs on the Raw pipeline only")
        if self.system.preset is SystemPreset.VAN_DER_POL:
            available = self.system.vdp.num_samples
            if self.trajectory_length > available:
                raise ValueError(
                    f"Van der Pol run records {available} samples but the grid needs {self.trajectory_length}"
                )
        return self

    @property
    def theta_max(self) -> int:
        return max(self.theta_values)

    @property
    def delay_max(self) -> int:
        return max(self.delay_values)

    @property
    def filter_columns(self) -> int:
        """Snapshots reserved for the filter window, gap included."""
        if self.denoiser is not Denoiser.NOISE_RESISTANT and not self.reserve_filter_window:
            return 0
        return 1 + self.filter_width + self.delay_max

    @property
    def trajectory_length(self) -> int:
        return self.theta_max + self.delay_max + 1 + self.filter_columns

    @property
    def cells(self) -> List[Tuple[int, int]]:
        return [(theta, d) for d in self.delay_values for theta in self.theta_values]
