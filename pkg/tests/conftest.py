"""
Pytest configuration and shared fixtures for all tests.

Provides seeded generators, the reference LTI systems and their trajectories,
and temporary output locations.
"""

import os
import tempfile
from pathlib import Path

import numpy as np
import pytest

# Keep settings side effects out of the working tree
os.environ['KMDLAB_OUTPUT_DIR'] = str(Path(tempfile.gettempdir()) / "kmdlab_test_results")
os.environ.setdefault('KMDLAB_WORKERS', '2')

from kmdlab.config import get_settings  # noqa: E402
from kmdlab.models.domain import TimeSeries  # noqa: E402
from kmdlab.services.systems_lab import lti_trajectory, make_lti  # noqa: E402


# =========================
# Settings
# =========================

@pytest.fixture(autouse=True)
def reset_settings_cache():
    """Each test sees settings built from the current environment."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def settings():
    """Get application settings for tests."""
    return get_settings()


@pytest.fixture
def fixtures_dir():
    """Directory of sample input files."""
    return Path(__file__).parent / "fixtures"


@pytest.fixture
def temp_output_dir(tmp_path):
    """Create temporary output directory for tests."""
    out = tmp_path / "results"
    out.mkdir(parents=True, exist_ok=True)
    return out


# =========================
# Numerical Fixtures
# =========================

@pytest.fixture
def rng():
    """Seeded generator; tests stay reproducible."""
    return np.random.default_rng(20240611)


@pytest.fixture
def seventh_roots():
    """e^{2πij/7}, j = 1..7."""
    return np.exp(2j * np.pi * np.arange(1, 8) / 7)


@pytest.fixture
def doubling_series():
    """Scalar series [1, 2, 4, 8] of the recurrence z_{k+1} = 2 z_k."""
    return TimeSeries(np.array([[1.0, 2.0, 4.0, 8.0]]), label="doubling")


# =========================
# Reference Systems
# =========================

@pytest.fixture
def lti1a():
    """LTI1a with one scalar observable."""
    return make_lti("LTI1a", m=1, seed=3)


@pytest.fixture
def lti1b():
    """LTI1b with one scalar observable."""
    return make_lti("LTI1b", m=1, seed=3)


@pytest.fixture
def lti1a_full_rank():
    """LTI1a observed through a rank-7 dictionary."""
    return make_lti("LTI1a", m=8, full_rank_dictionary=True, seed=5)


@pytest.fixture
def lti1a_series(lti1a):
    """60 snapshots of LTI1a."""
    return lti_trajectory(lti1a, 60)


@pytest.fixture
def lti1b_series(lti1b):
    """60 snapshots of LTI1b."""
    return lti_trajectory(lti1b, 60)
