"""
Test systems and time-series I/O.

LTI systems are diagonal: the trajectory is ``Z = C Θ`` with
``C = C̃ diag(φ)`` and Θ the Vandermonde matrix of the eigenvalues, computed
as a direct product rather than by iterating the state. The Van der Pol
oscillator is integrated with fixed-step RK4 and observed through a 1×2
dictionary.
"""

import csv
import logging
import math
import re
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from kmdlab.core.exceptions import (
    CsvFormatError,
    ExportError,
    IntegrationError,
    InvalidParameterError,
    NumericalError,
)
from kmdlab.linalg.kernel import Tolerance, numerical_rank, vandermonde
from kmdlab.models.domain import LtiSystem, SpectrumSet, TimeSeries
from kmdlab.models.enums import ComplexCsvFormat, SystemPreset
from kmdlab.models.requests import VdpConfig

logger = logging.getLogger(__name__)

LTI3_STABLE_MODULI = (0.97, 0.93, 0.87)
DICTIONARY_MAGNITUDE = (0.5, 1.5)
# Initial-state magnitudes; modes of order 1e4 stay well above sensor noise
# of σ = 5 to 25
INITIAL_STATE_MAGNITUDE = (9.0e3, 1.1e4)
MAX_REDRAWS = 100
# Minimum spacing of randomly drawn eigenvalues, and their distance from 1
MIN_RANDOM_SEPARATION = 0.1
# LTI1b and LTI3 phases; wider spacing keeps their Vandermonde matrices
# well conditioned over short windows
PRESET_SEPARATION = 0.25
PRESET_REDRAWS = 2000
INLINE_IMAGINARY = re.compile(r"[\d.][ij]\b")
IMAGINARY_SUFFIX = re.compile(r"(?<=[\d.fn])i$")


# =========================
# LTI systems
# =========================

def _random_entries(
    rng: np.random.Generator,
    shape,
    magnitude_range: Tuple[float, float] = DICTIONARY_MAGNITUDE,
) -> np.ndarray:
    """Complex entries with magnitude in magnitude_range and uniform phase."""
    magnitude = rng.uniform(*magnitude_range, size=shape)
    phase = rng.uniform(-np.pi, np.pi, size=shape)
    return magnitude * np.exp(1j * phase)


def _random_phases(rng: np.random.Generator, count: int, moduli: np.ndarray) -> np.ndarray:
    """Eigenvalues with given moduli, separated from each other and from 1."""
    for _ in range(PRESET_REDRAWS):
        values = moduli * np.exp(1j * rng.uniform(-np.pi, np.pi, size=count))
        spread = np.abs(np.append(values, 1.0 + 0j)[:, None] - np.append(values, 1.0 + 0j)[None, :])
        np.fill_diagonal(spread, np.inf)
        if spread.min() >= PRESET_SEPARATION:
            return values
    raise NumericalError(f"Could not draw {count} separated eigenvalues in {PRESET_REDRAWS} attempts")


def preset_eigenvalues(preset: SystemPreset, rng: np.random.Generator) -> np.ndarray:
    """Spectrum of an LTI preset."""
    if preset is SystemPreset.LTI1A:
        j = np.arange(1, 8)
        return np.exp(2j * np.pi * j / 7)
    if preset is SystemPreset.LTI1B:
        return _random_phases(rng, 7, np.ones(7))
    if preset is SystemPreset.LTI3:
        moduli = np.array([1.0, 1.0, 1.0, 1.0, *LTI3_STABLE_MODULI])
        return _random_phases(rng, 7, moduli)
    raise InvalidParameterError("preset", preset.value, "has no built-in spectrum")


def _observation(
    rng: np.random.Generator,
    r: int,
    m: int,
    full_rank_dictionary: bool,
) -> Tuple[np.ndarray, np.ndarray]:
    if full_rank_dictionary and m < r:
        raise InvalidParameterError(
            "m", m, f"a full-rank dictionary needs at least r={r} observables"
        )
    for _ in range(MAX_REDRAWS):
        dictionary = _random_entries(rng, (m, r))
        if not full_rank_dictionary or numerical_rank(dictionary) == r:
            return dictionary, _random_entries(rng, r, INITIAL_STATE_MAGNITUDE)
    raise NumericalError(f"No rank-{r} dictionary after {MAX_REDRAWS} draws")


def make_lti(
    preset: Union[SystemPreset, str],
    m: int = 1,
    full_rank_dictionary: bool = False,
    seed: int = 0,
    eigenvalues=None,
) -> LtiSystem:
    """
    Build an LTI test system.

    Args:
        preset: LTI1a, LTI1b, LTI3 or Custom
        m: Number of observables
        full_rank_dictionary: Redraw C̃ until it has rank r
        seed: Seed for phases, dictionary and initial state
        eigenvalues: Spectrum for the Custom preset
    """
    preset = SystemPreset(preset)
    if m < 1:
        raise InvalidParameterError("m", m, "must be at least 1")
    if preset is SystemPreset.VAN_DER_POL:
        raise InvalidParameterError("preset", preset.value, "is not an LTI system")

    rng = np.random.default_rng(seed)
    if preset is SystemPreset.CUSTOM:
        if eigenvalues is None:
            raise InvalidParameterError("eigenvalues", None, "required for Custom systems")
        spectrum = SpectrumSet(eigenvalues)
        if len(spectrum) != np.asarray(eigenvalues).size:
            raise InvalidParameterError("eigenvalues", eigenvalues, "must be pairwise distinct")
    else:
        spectrum = SpectrumSet(preset_eigenvalues(preset, rng))

    dictionary, initial_state = _observation(rng, len(spectrum), m, full_rank_dictionary)
    logger.debug(f"Built {preset.value} system: r={len(spectrum)}, m={m}, seed={seed}")
    return LtiSystem(spectrum, dictionary, initial_state, name=preset.value, seed=seed)


def redraw_observation(sys: LtiSystem, seed: int, full_rank_dictionary: bool = False) -> LtiSystem:
    """Same spectrum, fresh dictionary and initial state."""
    rng = np.random.default_rng(seed)
    dictionary, initial_state = _observation(rng, sys.r, sys.m, full_rank_dictionary)
    return LtiSystem(sys.eigenvalues, dictionary, initial_state, name=sys.name, seed=seed)


def random_lti(
    r: int,
    m: int = 1,
    modulus_range: Tuple[float, float] = (0.9, 1.0),
    seed: int = 0,
    full_rank_dictionary: bool = False,
) -> LtiSystem:
    """r distinct eigenvalues with moduli drawn from modulus_range and uniform phases."""
    if r < 1:
        raise InvalidParameterError("r", r, "must be at least 1")
    low, high = modulus_range
    if not 0.0 < low <= high:
        raise InvalidParameterError("modulus_range", modulus_range, "needs 0 < low <= high")

    rng = np.random.default_rng(seed)
    for _ in range(MAX_REDRAWS):
        values = rng.uniform(low, high, size=r) * np.exp(1j * rng.uniform(-np.pi, np.pi, size=r))
        spread = np.abs(values[:, None] - values[None, :])
        np.fill_diagonal(spread, np.inf)
        if r == 1 or spread.min() >= MIN_RANDOM_SEPARATION / r:
            break
    spectrum = SpectrumSet(values)
    dictionary, initial_state = _observation(rng, r, m, full_rank_dictionary)
    return LtiSystem(spectrum, dictionary, initial_state, name=SystemPreset.CUSTOM.value, seed=seed)


def lti_trajectory(sys: LtiSystem, num_snapshots: int) -> TimeSeries:
    """``Z = C̃ diag(φ) Θ`` with Θ the num_snapshots-column Vandermonde matrix."""
    if num_snapshots < 2:
        raise InvalidParameterError("num_snapshots", num_snapshots, "must be at least 2")
    data = sys.mode_matrix @ vandermonde(sys.eigenvalues.values, num_snapshots)
    return TimeSeries(data, label=sys.name)


def is_well_posed(sys: LtiSystem, theta: int, strict: bool = False) -> bool:
    """θ ≥ r (θ ≥ r+1 when strict) with every initial-state entry nonzero."""
    needed = sys.r + 1 if strict else sys.r
    return theta >= needed and bool(np.all(sys.initial_state != 0))


def is_koopman_invariant(sys: LtiSystem, tol: Tolerance = None) -> bool:
    """Whether the dictionary has full column rank r."""
    return numerical_rank(sys.dictionary, tol) == sys.r


def min_delays_for_invariance(sys: LtiSystem, tol: Tolerance = None) -> int:
    """Least d for which the d-delayed dictionary ``[C̃; C̃Λ; …; C̃Λ^d]`` has rank r."""
    blocks: List[np.ndarray] = []
    step = sys.dictionary
    for d in range(sys.r):
        blocks.append(step)
        if numerical_rank(np.vstack(blocks), tol) == sys.r:
            return d
        step = step * sys.eigenvalues.values[None, :]
    raise NumericalError(f"Delayed dictionary of {sys.name} never reaches rank {sys.r}")


# =========================
# Van der Pol
# =========================

def vdp_field(mu: float) -> Callable[[np.ndarray], np.ndarray]:
    """Van der Pol vector field ``(υ₂, μ(1 - υ₁²)υ₂ - υ₁)``."""
    def f(x: np.ndarray) -> np.ndarray:
        return np.array([x[1], mu * (1.0 - x[0] ** 2) * x[1] - x[0]])
    return f


def rk4_step(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, dt: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step."""
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def vdp_states(cfg: VdpConfig) -> np.ndarray:
    """
    Sampled Van der Pol states, shape 2 × num_samples.

    Raises:
        IntegrationError: The state became non-finite
    """
    f = vdp_field(cfg.mu)
    x = np.array(cfg.initial, dtype=float)
    if cfg.dt > 0.01:
        logger.warning(f"RK4 step dt={cfg.dt} exceeds the recommended 0.01")

    step = 0
    for _ in range(cfg.burn_in_steps):
        x = rk4_step(f, x, cfg.dt)
        step += 1
    if not np.all(np.isfinite(x)):
        raise IntegrationError(step)

    states = np.empty((2, cfg.num_samples))
    states[:, 0] = x
    for k in range(1, cfg.num_samples):
        for _ in range(cfg.sample_stride):
            x = rk4_step(f, x, cfg.dt)
            step += 1
        if not np.all(np.isfinite(x)):
            raise IntegrationError(step)
        states[:, k] = x
    return states


def vdp_trajectory(cfg: VdpConfig, dictionary=None) -> TimeSeries:
    """Van der Pol samples observed through a 1×2 dictionary (default [1, 0])."""
    C = np.array([[1.0, 0.0]]) if dictionary is None else np.atleast_2d(np.asarray(dictionary))
    if C.shape != (1, 2):
        raise InvalidParameterError("dictionary", C.shape, "must be 1x2")
    return TimeSeries(C @ vdp_states(cfg), label=SystemPreset.VAN_DER_POL.value)


# =========================
# CSV
# =========================

def normalize_complex_text(text: str) -> str:
    """'1.5-2i' → '1.5-2j'; 'inf' and 'nan' are left alone."""
    return IMAGINARY_SUFFIX.sub("j", text.replace(" ", ""))


def _parse_cell(cell: str, fmt: ComplexCsvFormat) -> complex:
    cell = cell.strip()
    if fmt is ComplexCsvFormat.INLINE:
        return complex(normalize_complex_text(cell))
    return complex(float(cell))


def _split_row(line: str, fmt: ComplexCsvFormat) -> List[complex]:
    if fmt is ComplexCsvFormat.PAIRED:
        values = []
        for pair in line.split(";"):
            parts = pair.split(",")
            if len(parts) != 2:
                raise ValueError(f"expected 're,im', got {pair!r}")
            values.append(complex(float(parts[0]), float(parts[1])))
        return values
    return [_parse_cell(cell, fmt) for cell in next(csv.reader([line]))]


def _detect_format(lines: List[str]) -> ComplexCsvFormat:
    sample = "".join(lines[-3:])
    if ";" in sample:
        return ComplexCsvFormat.PAIRED
    if INLINE_IMAGINARY.search(sample):
        return ComplexCsvFormat.INLINE
    return ComplexCsvFormat.REAL


def _is_header(line: str) -> bool:
    first = line.split(";")[0].split(",")[0].strip()
    try:
        complex(normalize_complex_text(first))
        return False
    except ValueError:
        return True


def ingest_csv(path: Union[str, Path], complex_format: Optional[ComplexCsvFormat] = None) -> TimeSeries:
    """
    Read a time series CSV: rows are observables, columns are snapshots.

    UTF-8, comma-separated, with an optional header row such as ``obs_1,…``.
    Complex entries are written inline as ``a+bi`` or as ``re,im`` pairs
    separated by ``;``. The format is detected when not given.

    Raises:
        CsvFormatError: Missing or empty file, ragged rows, non-numeric cells
    """
    path = Path(path)
    if not path.is_file():
        raise CsvFormatError(str(path), "file not found")
    with path.open(encoding="utf-8", newline="") as fh:
        raw = [(no, line.strip()) for no, line in enumerate(fh, start=1)]
    numbered = [(no, line) for no, line in raw if line]
    if numbered and _is_header(numbered[0][1]):
        numbered = numbered[1:]
    if not numbered:
        raise CsvFormatError(str(path), "no data rows")

    fmt = ComplexCsvFormat(complex_format) if complex_format else _detect_format([l for _, l in numbered])
    rows = []
    for no, line in numbered:
        try:
            row = _split_row(line, fmt)
        except ValueError as e:
            raise CsvFormatError(str(path), f"non-numeric cell ({e})", line=no)
        if rows and len(row) != len(rows[0]):
            raise CsvFormatError(str(path), f"expected {len(rows[0])} columns, found {len(row)}", line=no)
        rows.append(row)

    logger.info(f"Loaded {len(rows)}x{len(rows[0])} {fmt.value} series from {path}")
    return TimeSeries(np.array(rows, dtype=np.complex128), label=path.stem)


def _format_inline(value: complex) -> str:
    im = value.imag
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"{value.real!r}{sign}{abs(im)!r}i"


def export_csv(
    Z: TimeSeries,
    path: Union[str, Path],
    complex_format: Optional[ComplexCsvFormat] = None,
) -> Path:
    """
    Write Z in the format read by :func:`ingest_csv`.

    Floats are printed with ``repr`` (shortest round-trip form). Real series
    default to plain values, complex series to ``re,im`` pairs.
    """
    path = Path(path)
    is_real = bool(np.all(Z.data.imag == 0.0))
    fmt = ComplexCsvFormat(complex_format) if complex_format else (
        ComplexCsvFormat.REAL if is_real else ComplexCsvFormat.PAIRED
    )
    if fmt is ComplexCsvFormat.REAL and not is_real:
        raise InvalidParameterError("complex_format", fmt.value, "series has imaginary parts")

    lines = []
    for row in Z.data:
        if fmt is ComplexCsvFormat.REAL:
            lines.append(",".join(repr(float(v.real)) for v in row))
        elif fmt is ComplexCsvFormat.INLINE:
            lines.append(",".join(_format_inline(complex(v)) for v in row))
        else:
            lines.append(";".join(f"{float(v.real)!r},{float(v.imag)!r}" for v in row))

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise ExportError(str(path), str(e))
    logger.info(f"Wrote {Z.num_observables}x{Z.num_snapshots} series to {path}")
    return path
