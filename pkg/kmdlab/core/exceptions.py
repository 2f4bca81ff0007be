"""
Custom exceptions for kmdlab.

Provides a hierarchy of exceptions for the failure modes of the numerical
library and the experiment harness, each with a CLI exit code and a stable
error code.
"""

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


class KmdLabError(Exception):
    """Base exception for all kmdlab errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_NUMERICAL_FAILURE,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code or self.__class__.__name__
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for CLI error output."""
        result = {
            'error': self.message,
            'error_code': self.error_code,
            'exit_code': self.exit_code,
        }
        if self.details:
            result['details'] = self.details
        return result


# Configuration exceptions
class ConfigError(KmdLabError):
    """Invalid configuration or parameters."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_CONFIG_ERROR,
            error_code='CONFIG_ERROR',
            details=details
        )


class ConfigurationError(ConfigError):
    """Settings could not be loaded or are inconsistent."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.error_code = 'CONFIGURATION_ERROR'


class SweepConfigError(ConfigError):
    """Sweep configuration is inconsistent."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.error_code = 'SWEEP_CONFIG_ERROR'


class InvalidParameterError(ConfigError):
    """A scalar parameter is outside its admissible range."""

    def __init__(self, name: str, value: Any, reason: str):
        super().__init__(
            f"Invalid {name}={value!r}: {reason}",
            details={'parameter': name, 'value': repr(value), 'reason': reason}
        )
        self.error_code = 'INVALID_PARAMETER'


# Input exceptions
class InputError(KmdLabError):
    """Input data is unusable."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_CONFIG_ERROR,
            error_code='INPUT_ERROR',
            details=details
        )


class DimensionMismatchError(InputError):
    """Operand shapes are incompatible."""

    def __init__(self, operation: str, expected: Any, actual: Any):
        super().__init__(
            f"Dimension mismatch in {operation}: expected {expected}, got {actual}",
            details={'operation': operation, 'expected': str(expected), 'actual': str(actual)}
        )
        self.error_code = 'DIMENSION_MISMATCH'


class NonFiniteInputError(InputError):
    """Input contains NaN or Inf entries."""

    def __init__(self, what: str):
        super().__init__(f"Non-finite entries in {what}", details={'input': what})
        self.error_code = 'NON_FINITE_INPUT'


class EmptyInputError(InputError):
    """Input has no entries."""

    def __init__(self, what: str):
        super().__init__(f"Empty input: {what}", details={'input': what})
        self.error_code = 'EMPTY_INPUT'


class InsufficientSnapshotsError(InputError):
    """Too few columns for the requested operation."""

    def __init__(self, required: int, available: int, reason: Optional[str] = None):
        message = f"Need at least {required} snapshots, have {available}"
        if reason:
            message += f" ({reason})"
        super().__init__(
            message,
            details={'required': required, 'available': available, 'reason': reason}
        )
        self.error_code = 'INSUFFICIENT_SNAPSHOTS'


class CenteringError(InputError):
    """A mean-subtracted input was expected but the data is not centred."""

    def __init__(self, relative_mean: float, tolerance: float):
        super().__init__(
            f"Input is not centred: relative temporal mean {relative_mean:.3e} "
            f"exceeds {tolerance:.1e}",
            details={'relative_mean': relative_mean, 'tolerance': tolerance}
        )
        self.error_code = 'NOT_CENTRED'


class CsvFormatError(InputError):
    """CSV time series could not be parsed."""

    def __init__(self, path: str, reason: str, line: Optional[int] = None):
        message = f"Invalid time series CSV {path}: {reason}"
        if line is not None:
            message += f" (line {line})"
        super().__init__(message, details={'path': path, 'reason': reason, 'line': line})
        self.error_code = 'CSV_FORMAT_ERROR'


# Numerical exceptions
class NumericalError(KmdLabError):
    """A computation broke down numerically."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            exit_code=EXIT_NUMERICAL_FAILURE,
            error_code='NUMERICAL_ERROR',
            details=details
        )


class DegenerateSpectrumError(NumericalError):
    """DMD eigenvalues are too close for Vandermonde-normalized modes."""

    def __init__(self, min_separation: float, tolerance: float):
        super().__init__(
            f"Eigenvalues are degenerate: minimum separation {min_separation:.3e} "
            f"is below {tolerance:.1e}",
            details={'min_separation': min_separation, 'tolerance': tolerance}
        )
        self.error_code = 'DEGENERATE_SPECTRUM'


class EigenMatchingError(NumericalError):
    """A target eigenvalue has no counterpart in a computed spectrum."""

    def __init__(self, target: complex, distance: float, tolerance: float):
        super().__init__(
            f"No eigenvalue within {tolerance:.1e} of {target:.6g} "
            f"(closest at {distance:.3e})",
            details={'target': str(target), 'distance': distance, 'tolerance': tolerance}
        )
        self.error_code = 'EIGEN_MATCHING_FAILED'


class IntegrationError(NumericalError):
    """ODE integration produced a non-finite state."""

    def __init__(self, step: int):
        super().__init__(
            f"Integration produced a non-finite state at step {step}",
            details={'step': step}
        )
        self.error_code = 'INTEGRATION_FAILED'


# Output exceptions
class ExportError(KmdLabError):
    """Writing results failed."""

    def __init__(self, path: str, reason: str):
        super().__init__(
            message=f"Cannot write {path}: {reason}",
            exit_code=EXIT_NUMERICAL_FAILURE,
            error_code='EXPORT_ERROR',
            details={'path': path, 'reason': reason}
        )
