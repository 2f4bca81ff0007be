"""Enumeration types for kmdlab."""

from enum import Enum


class RunStatus(str, Enum):
    """Status of a sweep run or ensemble member."""
    QUEUED = "queued"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class RegimeTag(str, Enum):
    """Sampling regime of a companion model relative to the system order."""
    UNDER_SAMPLED = "under_sampled"
    JUST_SAMPLED = "just_sampled"
    OVER_SAMPLED = "over_sampled"


class SystemPreset(str, Enum):
    """Test systems known to the generators."""
    LTI1A = "LTI1a"
    LTI1B = "LTI1b"
    LTI3 = "LTI3"
    CUSTOM = "Custom"
    VAN_DER_POL = "VanDerPol"

    @property
    def is_lti(self) -> bool:
        return self is not SystemPreset.VAN_DER_POL


class IndicatorKind(str, Enum):
    """Scalar indicator computed per ensemble member."""
    DFT_DISTANCE = "DftDistance"
    KMD_QUALITY = "KmdQuality"
    PRUNED_SPECTRUM = "PrunedSpectrum"


class KmdTarget(str, Enum):
    """Target set B for KMD-Quality, derived from the true spectrum."""
    SIGMA = "Sigma"
    SIGMA_MINUS_ONE = "SigmaMinusOne"
    SIGMA_PLUS_ONE = "SigmaPlusOne"


class PipelineKind(str, Enum):
    """Preprocessing applied before companion DMD."""
    RAW = "Raw"
    MS_THEN_DELAY = "MsThenDelay"
    DELAY_THEN_MS = "DelayThenMs"


class Denoiser(str, Enum):
    """Companion DMD variant used on noisy data."""
    PLAIN = "Plain"
    TLS = "Tls"
    NOISE_RESISTANT = "NoiseResistant"


class NoiseDistribution(str, Enum):
    """Sensor noise distributions."""
    UNIFORM_ZERO_MEAN = "UniformZeroMean"


class ExportFormat(str, Enum):
    """Sweep result output formats."""
    CSV = "csv"
    JSON = "json"
    SVG = "svg"


class ComplexCsvFormat(str, Enum):
    """Encoding of complex entries in time series CSV files."""
    REAL = "real"
    INLINE = "inline"    # a+bi
    PAIRED = "paired"    # re,im;re,im
