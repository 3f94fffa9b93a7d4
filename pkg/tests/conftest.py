"""
Pytest configuration and fixtures for qrmax tests.
"""
import json
import os
import sys
from pathlib import Path

# Import pytest fixtures and configuration
import numpy as np
import pytest

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line(
        "markers", "unit: Unit tests"
    )
    config.addinivalue_line(
        "markers", "integration: Integration tests"
    )
    config.addinivalue_line(
        "markers", "slow: Slow-running tests"
    )


@pytest.fixture
def rng():
    """Seeded generator so sampled checks are reproducible."""
    return np.random.default_rng(12345)


@pytest.fixture
def test_env_vars():
    """Fixture providing test environment variables."""
    original_env = os.environ.copy()

    # Set test environment variables
    os.environ.update({
        'QRMAX_THREADS': '2',
        'QRMAX_LOG_LEVEL': 'WARNING',
        'QRMAX_OUTPUT_DIR': 'outputs',
        'QRMAX_PNG_PREVIEW': 'false',
    })

    from config.settings import reload_settings
    reload_settings()

    yield

    # Restore original environment
    os.environ.clear()
    os.environ.update(original_env)
    reload_settings()


@pytest.fixture
def small_spiral_config():
    """Planar spiral experiment small enough for a unit test run."""
    return {
        "dimension": 2,
        "seed": 7,
        "set": {"kind": "log-spiral", "omega": 1.0},
        "map": {"type": "polynomial", "degree": 2},
        "plan": {
            "r_grid": {"spacing": "geometric", "min": 0.2, "max": 5.0, "count": 6},
            "samples_per_sphere": 512,
            "property_samples": 200,
            "lipschitz_pairs": 200,
            "preimage_targets": 10,
            "distortion": {"samples": 40, "probe_radius": 1e-4},
        },
        "output": {"prefix": "small"},
    }


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict to a JSON file and return its path."""
    def _write(data, name="experiment.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path
    return _write
