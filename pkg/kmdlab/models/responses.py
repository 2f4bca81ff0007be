"""Report and result models produced by kmdlab operations."""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from kmdlab.models.enums import IndicatorKind, KmdTarget, PipelineKind, RegimeTag

ComplexPair = Tuple[float, float]


def to_pairs(values) -> List[ComplexPair]:
    """Complex array as a list of [re, im] pairs for JSON output."""
    return [(float(v.real), float(v.imag)) for v in np.asarray(values, dtype=np.complex128).reshape(-1)]


def from_pairs(pairs: Sequence[ComplexPair]) -> np.ndarray:
    """Inverse of :func:`to_pairs`."""
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


class DftDistanceReport(BaseModel):
    """Relative distance of mean-subtracted DMD to the temporal DFT."""

    theta: int = Field(..., ge=1, description="Companion order")
    d: int = Field(..., ge=0, description="Delays applied before centring")
    distance: float = Field(..., ge=0.0, description="||c_ms + 1|| / sqrt(θ)")
    c_ms: List[ComplexPair] = Field(..., description="Mean-subtracted companion coefficients")
    equivalent: bool = Field(..., description="distance < decision_tol")
    decision_tol: float = Field(1e-6, gt=0.0)

    @model_validator(mode="after")
    def check_decision(self) -> "DftDistanceReport":
        if self.equivalent != (self.distance < self.decision_tol):
            raise ValueError("'equivalent' must equal distance < decision_tol")
        if len(self.c_ms) != self.theta:
            raise ValueError(f"c_ms has {len(self.c_ms)} entries, expected θ={self.theta}")
        return self

    @property
    def c_ms_array(self) -> np.ndarray:
        return from_pairs(self.c_ms)


class CellStats(BaseModel):
    """Five-number summary of one indicator over an ensemble."""

    theta: int = Field(..., ge=1)
    delays: int = Field(..., ge=0)
    min: float
    q1: float
    median: float
    q3: float
    max: float
    count: int = Field(..., ge=1)

    @model_validator(mode="after")
    def check_order(self) -> "CellStats":
        if not self.min <= self.q1 <= self.median <= self.q3 <= self.max:
            raise ValueError("Statistics must satisfy min <= q1 <= median <= q3 <= max")
        return self

    @classmethod
    def from_samples(cls, theta: int, delays: int, samples: Sequence[float]) -> "CellStats":
        """
        Summarize samples with linearly interpolated quartiles.

        The quantile at level p sits at position (count - 1) * p of the sorted
        samples, interpolating between neighbours.
        """
        values = np.asarray(samples, dtype=float)
        q = np.percentile(values, [0, 25, 50, 75, 100], method="linear")
        # Interpolation rounding can invert equal neighbours by one ulp
        q = np.maximum.accumulate(q)
        return cls(
            theta=theta, delays=delays,
            min=float(q[0]), q1=float(q[1]), median=float(q[2]),
            q3=float(q[3]), max=float(q[4]),
            count=int(values.size),
        )


class SufficiencyReport(BaseModel):
    """Relative distance to DFT across companion orders at d = r_max - 1."""

    r_max_assumed: int = Field(..., ge=1)
    delays: int = Field(..., ge=0)
    distances: Dict[int, CellStats] = Field(..., description="Per-θ ensemble statistics")
    jump_location: Optional[int] = Field(None, description="First θ where the median jumps")
    lower_bound_on_r: Optional[int] = Field(
        None,
        description="Set to r_max + 1 when no jump occurs through θ = r_max + 1"
    )

    @model_validator(mode="after")
    def check_jump(self) -> "SufficiencyReport":
        if self.jump_location is not None and self.jump_location not in self.distances:
            raise ValueError(f"jump_location {self.jump_location} lies outside the swept range")
        return self


class KmdQualityReport(BaseModel):
    """KMD-Quality of a companion model against a target eigenvalue set."""

    rho_subset: float = Field(..., ge=0.0)
    delta_trivial: float = Field(..., ge=0.0, le=1.0)
    quality: float = Field(..., ge=0.0, le=1.0)
    superset_c: List[ComplexPair] = Field(..., description="Closest superset companion coefficients")

    @model_validator(mode="after")
    def check_quality(self) -> "KmdQualityReport":
        expected = 1.0 - max(1.0 - 10.0 ** (-self.rho_subset), self.delta_trivial)
        if abs(self.quality - expected) > 1e-12:
            raise ValueError(f"quality {self.quality} does not match its components ({expected})")
        return self

    @property
    def superset_c_array(self) -> np.ndarray:
        return from_pairs(self.superset_c)


class FitReport(BaseModel):
    """Summary of one companion DMD fit."""

    theta: int = Field(..., ge=1)
    delays: int = Field(0, ge=0)
    pipeline: str = Field("raw", description="Preprocessing steps, e.g. 'delay(6)>ms'")
    c_star: List[ComplexPair]
    residual_norm: float = Field(..., ge=0.0)
    eigenvalues: List[ComplexPair]
    mode_norms: List[float]
    degenerate: bool = False
    min_separation: Optional[float] = Field(None, description="None when θ = 1")
    linearly_consistent: Optional[bool] = None
    regime: Optional[RegimeTag] = None
    kept: Optional[List[ComplexPair]] = Field(None, description="Eigenvalues with non-trivial modes")


class SweepResult(BaseModel):
    """Ensemble statistics of one indicator over a (θ, d) grid."""

    schema_version: str = "v1"
    indicator: IndicatorKind
    kmd_target: Optional[KmdTarget] = None
    pipeline: PipelineKind = PipelineKind.RAW
    system: str = Field("", description="System preset name")
    seed: int = 0
    ensemble_size: int = Field(1, ge=1)
    cells: List[CellStats] = Field(..., min_length=1)
    failed_members: int = Field(0, ge=0, description="Members that crashed or lost at least one cell")
    skipped_values: int = Field(0, ge=0, description="Member-cell values dropped after a numerical failure")

    @property
    def delay_values(self) -> List[int]:
        return sorted({c.delays for c in self.cells})

    @property
    def theta_values(self) -> List[int]:
        return sorted({c.theta for c in self.cells})

    def cell(self, theta: int, delays: int) -> CellStats:
        for c in self.cells:
            if c.theta == theta and c.delays == delays:
                return c
        raise KeyError((theta, delays))

    def medians(self, delays: int) -> Dict[int, float]:
        """θ → median for one delay count."""
        return {c.theta: c.median for c in self.cells if c.delays == delays}
