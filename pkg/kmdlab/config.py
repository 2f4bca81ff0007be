"""
Configuration management for kmdlab.

Centralizes the tolerances, worker counts and output locations used by the
CLI and the sweep harness, with environment-based overrides and validation
via Pydantic.
"""

import logging
from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from kmdlab.core.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Application settings with environment variable support (prefix KMDLAB_)."""

    model_config = SettingsConfigDict(
        env_prefix="KMDLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Core Settings
    VERSION: str = "1.0.0"
    LOG_LEVEL: str = Field(default="INFO", description="Logging level")
    LOG_DIR: Optional[Path] = Field(
        default=None,
        description="Directory for rotating log files (console only when unset)"
    )
    LOG_FILE_MAX_BYTES: int = Field(
        default=10485760,  # 10MB
        ge=1024,
        description="Maximum log file size before rotation"
    )
    LOG_FILE_BACKUP_COUNT: int = Field(default=3, ge=0, le=50)

    # Ensemble execution
    WORKERS: int = Field(default=4, ge=1, le=64, description="Ensemble worker threads")

    # Numerical tolerances
    SVD_RELATIVE_TOL: float = Field(
        default=1e-8,
        gt=0.0,
        lt=1.0,
        description="Relative singular value cutoff for every pseudo-inverse"
    )
    DECISION_TOL: float = Field(
        default=1e-6,
        gt=0.0,
        lt=1.0,
        description="Relative distance to DFT below which equivalence is reported"
    )
    MODE_NORM_REL_TOL: float = Field(
        default=1e-8,
        gt=0.0,
        lt=1.0,
        description="Mode norm cutoff, relative to the largest mode norm"
    )
    EIGEN_MATCH_TOL: float = Field(default=1e-6, gt=0.0, lt=1.0)
    EIGEN_SEPARATION_TOL: float = Field(default=1e-6, gt=0.0, lt=1.0)
    ROOT_OF_UNITY_TOL: float = Field(default=1e-9, gt=0.0, lt=1.0)
    P_MAX: int = Field(default=64, ge=1, le=4096, description="Largest root-of-unity order scanned")

    # Sufficiency scan
    JUMP_FACTOR: float = Field(default=100.0, gt=1.0)
    JUMP_FLOOR: float = Field(default=1e-12, gt=0.0)

    # De-noising
    FILTER_WIDTH: int = Field(
        default=14,
        ge=2,
        description="Columns of the delayed filter window in noise-resistant DMD"
    )

    # Output
    OUTPUT_DIR: Path = Field(
        default=Path("./results"),
        description="Default directory for sweep outputs"
    )

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Accept only standard logging level names."""
        v = v.upper()
        if v not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown log level: {v}")
        return v

    @field_validator("OUTPUT_DIR", "LOG_DIR")
    @classmethod
    def ensure_directory_writable(cls, v: Optional[Path]) -> Optional[Path]:
        """Ensure directory exists and is writable."""
        if v is None:
            return v
        v = Path(v).resolve()
        v.mkdir(parents=True, exist_ok=True)

        test_file = v / ".write_test"
        try:
            test_file.touch()
            test_file.unlink()
        except (PermissionError, OSError) as e:
            raise ValueError(f"Directory {v} is not writable: {e}")

        return v

    def get_output_path(self, relative_path: str) -> Path:
        """Resolve an output path relative to OUTPUT_DIR unless already absolute."""
        path = Path(relative_path)
        return path if path.is_absolute() else self.OUTPUT_DIR / path


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance.

    Only one Settings instance is created per process; tests clear the cache
    with ``get_settings.cache_clear()`` after changing the environment.
    """
    return Settings()


def validate_settings() -> Settings:
    """
    Validate settings and raise a ConfigurationError if invalid.

    Called by the CLI at start-up to fail fast on configuration errors.
    """
    try:
        settings = get_settings()
    except Exception as e:
        raise ConfigurationError(f"Configuration validation failed: {e}")

    if settings.EIGEN_MATCH_TOL <= settings.SVD_RELATIVE_TOL:
        raise ConfigurationError(
            "EIGEN_MATCH_TOL must exceed SVD_RELATIVE_TOL",
            details={
                "EIGEN_MATCH_TOL": settings.EIGEN_MATCH_TOL,
                "SVD_RELATIVE_TOL": settings.SVD_RELATIVE_TOL,
            },
        )

    logger.debug(
        f"Configuration validated: workers={settings.WORKERS}, "
        f"svd_tol={settings.SVD_RELATIVE_TOL}, decision_tol={settings.DECISION_TOL}, "
        f"output={settings.OUTPUT_DIR}"
    )
    return settings


__all__ = [
    "Settings",
    "get_settings",
    "validate_settings",
]
