"""Domain types, input models and report schemas."""

from kmdlab.models.domain import (
    DmdModel,
    LtiSystem,
    MsubCase,
    MsubEfficacy,
    PipelineDescriptor,
    PrunedSpectrum,
    SamplingRegime,
    SpectrumSet,
    TimeSeries,
)
from kmdlab.models.enums import (
    ComplexCsvFormat,
    Denoiser,
    ExportFormat,
    IndicatorKind,
    KmdTarget,
    NoiseDistribution,
    PipelineKind,
    RegimeTag,
    RunStatus,
    SystemPreset,
)
from kmdlab.models.requests import NoiseSpec, SweepConfig, SystemSpec, Tolerances, VdpConfig
from kmdlab.models.responses import (
    CellStats,
    DftDistanceReport,
    FitReport,
    KmdQualityReport,
    SufficiencyReport,
    SweepResult,
)

__all__ = [
    # Domain types
    "DmdModel",
    "LtiSystem",
    "MsubCase",
    "MsubEfficacy",
    "PipelineDescriptor",
    "PrunedSpectrum",
    "SamplingRegime",
    "SpectrumSet",
    "TimeSeries",
    # Enums
    "ComplexCsvFormat",
    "Denoiser",
    "ExportFormat",
    "IndicatorKind",
    "KmdTarget",
    "NoiseDistribution",
    "PipelineKind",
    "RegimeTag",
    "RunStatus",
    "SystemPreset",
    # Input models
    "NoiseSpec",
    "SweepConfig",
    "SystemSpec",
    "Tolerances",
    "VdpConfig",
    # Reports
    "CellStats",
    "DftDistanceReport",
    "FitReport",
    "KmdQualityReport",
    "SufficiencyReport",
    "SweepResult",
]
