"""
Numerical domain types.

Frozen containers over numpy arrays. Arrays are copied and made read-only on
construction so values can be shared across worker threads.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Tuple, Union

import numpy as np

from kmdlab.core.exceptions import (
    DimensionMismatchError,
    EmptyInputError,
    InsufficientSnapshotsError,
    InvalidParameterError,
)
from kmdlab.linalg.kernel import as_cmatrix, as_cvector, spectral_order
from kmdlab.models.enums import RegimeTag


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


# =========================
# Pipeline provenance
# =========================

@dataclass(frozen=True)
class MeanSubtract:
    """Removal of the temporal mean from every snapshot."""

    def describe(self) -> str:
        return "ms"


@dataclass(frozen=True)
class Delay:
    """Delay embedding with d time delays."""
    delays: int

    def __post_init__(self):
        if self.delays < 0:
            raise InvalidParameterError("delays", self.delays, "must be non-negative")

    def describe(self) -> str:
        return f"delay({self.delays})"


PipelineStep = Union[MeanSubtract, Delay]


@dataclass(frozen=True)
class PipelineDescriptor:
    """
    Ordered preprocessing steps applied to a source series.

    ``theta`` is the companion order of the result: its column count minus one.
    """
    theta: int
    steps: Tuple[PipelineStep, ...] = ()
    source_label: str = ""

    def then(self, step: PipelineStep, theta: int) -> "PipelineDescriptor":
        return PipelineDescriptor(
            theta=theta, steps=self.steps + (step,), source_label=self.source_label
        )

    @property
    def delays(self) -> int:
        return sum(s.delays for s in self.steps if isinstance(s, Delay))

    @property
    def mean_subtracted(self) -> bool:
        return any(isinstance(s, MeanSubtract) for s in self.steps)

    def describe(self) -> str:
        return ">".join(s.describe() for s in self.steps) or "raw"


# =========================
# Time series
# =========================

@dataclass(frozen=True, eq=False)
class TimeSeries:
    """
    Sequential observations: rows are observables, columns are snapshots.

    X is the first n columns, Y the last n, and the final column is z_{n+1}.
    """
    data: np.ndarray
    label: str = ""
    pipeline: Optional[PipelineDescriptor] = None

    def __post_init__(self):
        data = as_cmatrix(self.data, f"time series '{self.label}'")
        if data.shape[1] < 2:
            raise InsufficientSnapshotsError(2, data.shape[1], "a time series needs n+1 >= 2 columns")
        object.__setattr__(self, "data", _frozen(data))
        if self.pipeline is None:
            object.__setattr__(
                self, "pipeline",
                PipelineDescriptor(theta=data.shape[1] - 1, source_label=self.label)
            )

    @property
    def num_observables(self) -> int:
        return self.data.shape[0]

    @property
    def num_snapshots(self) -> int:
        return self.data.shape[1]

    @property
    def theta(self) -> int:
        """Companion order n of a model fitted to this series."""
        return self.data.shape[1] - 1

    @property
    def X(self) -> np.ndarray:
        return self.data[:, :-1]

    @property
    def Y(self) -> np.ndarray:
        return self.data[:, 1:]

    @property
    def last(self) -> np.ndarray:
        return self.data[:, -1]

    def derive(self, data: np.ndarray, step: PipelineStep) -> "TimeSeries":
        """New series produced from this one by a preprocessing step."""
        data = np.asarray(data)
        return TimeSeries(
            data=data,
            label=self.label,
            pipeline=self.pipeline.then(step, data.shape[1] - 1),
        )

    def window(self, start: int, stop: int) -> "TimeSeries":
        """Columns [start, stop) as a fresh, unprocessed series."""
        return TimeSeries(self.data[:, start:stop], label=self.label)


# =========================
# Spectra
# =========================

@dataclass(frozen=True, eq=False)
class SpectrumSet:
    """
    Finite set of complex eigenvalues.

    Values closer than ``match_tolerance`` are merged (first occurrence wins)
    and the remainder is kept in spectral order.
    """
    values: np.ndarray
    match_tolerance: float = 1e-12

    def __post_init__(self):
        raw = np.array(self.values, dtype=np.complex128).reshape(-1)
        if raw.size and not np.all(np.isfinite(raw)):
            raw = as_cvector(raw, "spectrum")
        if self.match_tolerance < 0:
            raise InvalidParameterError("match_tolerance", self.match_tolerance, "must be non-negative")

        kept = []
        for v in raw:
            if all(abs(v - k) > self.match_tolerance for k in kept):
                kept.append(v)
        merged = np.array(kept, dtype=np.complex128)
        merged = merged[spectral_order(merged)] if merged.size else merged
        object.__setattr__(self, "values", _frozen(merged))

    def __len__(self) -> int:
        return int(self.values.size)

    def __iter__(self) -> Iterator[complex]:
        return iter(complex(v) for v in self.values)

    def contains(self, value: complex, tol: Optional[float] = None) -> bool:
        tol = self.match_tolerance if tol is None else tol
        return bool(self.values.size) and bool(np.min(np.abs(self.values - value)) <= tol)

    def union(self, other: Union["SpectrumSet", np.ndarray, list]) -> "SpectrumSet":
        other_values = other.values if isinstance(other, SpectrumSet) else np.asarray(other)
        return SpectrumSet(np.concatenate([self.values, np.ravel(other_values)]), self.match_tolerance)

    def without(self, value: complex, tol: Optional[float] = None) -> "SpectrumSet":
        tol = self.match_tolerance if tol is None else tol
        keep = np.abs(self.values - value) > tol
        return SpectrumSet(self.values[keep], self.match_tolerance)

    def require_nonempty(self, name: str) -> "SpectrumSet":
        if not len(self):
            raise EmptyInputError(name)
        return self


# =========================
# Companion DMD model
# =========================

@dataclass(frozen=True, eq=False)
class DmdModel:
    """
    Fitted companion DMD model.

    ``modes[:, j]`` pairs with ``eigenvalues[j]``. When ``degenerate`` is set
    the eigenvalues are too close for Vandermonde normalization and the mode
    columns are ``X`` times unit-norm eigenvectors instead.
    """
    c_star: np.ndarray
    residual: np.ndarray
    eigenvalues: np.ndarray
    modes: np.ndarray
    eigenvectors: np.ndarray
    pipeline: PipelineDescriptor
    degenerate: bool = False
    min_separation: float = float("inf")

    def __post_init__(self):
        for name in ("c_star", "residual", "eigenvalues", "modes", "eigenvectors"):
            object.__setattr__(self, name, _frozen(np.array(getattr(self, name), dtype=np.complex128)))
        n = self.c_star.size
        if self.eigenvalues.size != n or self.modes.shape[1] != n:
            raise DimensionMismatchError("DmdModel", f"{n} eigenvalues and modes", self.modes.shape)

    @property
    def companion_order(self) -> int:
        return int(self.c_star.size)

    @property
    def mode_norms(self) -> np.ndarray:
        return np.linalg.norm(self.modes, axis=0)

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.residual))

    def spectrum(self, match_tolerance: float = 0.0) -> SpectrumSet:
        return SpectrumSet(self.eigenvalues, match_tolerance)


# =========================
# Regimes, systems, pruning
# =========================

@dataclass(frozen=True)
class SamplingRegime:
    """Companion order θ relative to system order r."""
    tag: RegimeTag
    theta: int
    r: int


@dataclass(frozen=True, eq=False)
class LtiSystem:
    """
    Diagonal LTI system observed through a linear dictionary.

    The series is ``Z = C Θ`` with ``C = dictionary @ diag(initial_state)``
    and Θ the Vandermonde matrix of the eigenvalues.
    """
    eigenvalues: SpectrumSet
    dictionary: np.ndarray
    initial_state: np.ndarray
    name: str = "Custom"
    seed: Optional[int] = None

    def __post_init__(self):
        dictionary = as_cmatrix(self.dictionary, "dictionary")
        initial_state = as_cvector(self.initial_state, "initial_state")
        r = len(self.eigenvalues)
        if r == 0:
            raise EmptyInputError("eigenvalues")
        if dictionary.shape[1] != r or initial_state.size != r:
            raise DimensionMismatchError(
                "LtiSystem", f"dictionary m x {r} and initial state of length {r}",
                f"{dictionary.shape} and {initial_state.size}"
            )
        if np.any(np.linalg.norm(dictionary, axis=0) == 0):
            raise InvalidParameterError("dictionary", "zero column", "every column must be nonzero")
        if np.any(initial_state == 0):
            raise InvalidParameterError("initial_state", "zero entry", "every entry must be nonzero")
        object.__setattr__(self, "dictionary", _frozen(dictionary))
        object.__setattr__(self, "initial_state", _frozen(initial_state))

    @property
    def r(self) -> int:
        return len(self.eigenvalues)

    @property
    def m(self) -> int:
        return self.dictionary.shape[0]

    @property
    def mode_matrix(self) -> np.ndarray:
        """C = C̃ diag(φ(υ₁)); column j is the Koopman mode of eigenvalue j."""
        return self.dictionary * self.initial_state[None, :]


@dataclass(frozen=True, eq=False)
class PrunedSpectrum:
    """DMD eigenvalues split by mode norm."""
    kept: SpectrumSet
    discarded: SpectrumSet
    mode_norms: Dict[int, float]
    norm_threshold: float


@dataclass(frozen=True, eq=False)
class MsubCase:
    """
    How mean subtraction rewrites the Vandermonde factor of Z = C Θ.

    ``nodes`` are the nodes of the rewritten factor Θ_ms; mean subtraction
    succeeds exactly when no all-ones row (node 1) is left in it.
    """
    case: str
    nodes: SpectrumSet
    has_ones_row: bool
    mu: np.ndarray

    @property
    def succeeds(self) -> bool:
        return not self.has_ones_row


@dataclass(frozen=True)
class MsubEfficacy:
    """
    Predicted outcome of mean subtraction for a Koopman-invariant dictionary.

    ``p_star`` is the least common order making every eigenvalue a root of
    unity, or None when no order up to p_max works.
    """
    p_star: Optional[int]
    one_in_spectrum: bool
    p_max: int = field(default=64)

    def succeeds_at(self, num_snapshots: int) -> bool:
        if self.p_star is None:
            return False
        return num_snapshots % self.p_star == 0
