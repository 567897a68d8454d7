"""
Pytest configuration and shared fixtures.
"""
import pytest
import tempfile
from pathlib import Path

from hermite_nc.expansion import random_band_limited
from hermite_nc.hermite import gauss_hermite_grid
from hermite_nc.types import ExperimentConfig
from hermite_nc.util import rng_for


@pytest.fixture
def temp_config_file():
    """Create a temporary experiment configuration file for testing."""
    toml_content = """
kind = "mehler-probe"
d = 1
seed = 7
out_dir = "/tmp/hermite-nc-test"
t_values = [0.1, 0.5, 1.0]
x_values = [-1.0, 0.0, 0.5]
y_values = [-0.5, 0.25, 1.5]

[runtime]
workers = 1
log_level = "DEBUG"
"""

    with tempfile.NamedTemporaryFile(mode="w", suffix=".toml", delete=False) as f:
        f.write(toml_content)
        f.flush()
        yield Path(f.name)

    # Cleanup
    Path(f.name).unlink(missing_ok=True)


@pytest.fixture
def sample_config():
    """Create a sample experiment configuration for testing."""
    return ExperimentConfig(
        kind="mehler-probe",
        d=1,
        seed=7,
        out_dir="/tmp/hermite-nc-test",
        t_values=[0.1, 0.5, 1.0],
        x_values=[-1.0, 0.0, 0.5],
        y_values=[-0.5, 0.25, 1.5],
        workers=1,
        log_level="DEBUG",
    )


@pytest.fixture
def grid_1d():
    """Gauss-Hermite grid with 40 nodes."""
    return gauss_hermite_grid(40, 1)


@pytest.fixture
def band_limited():
    """A 2x2 band-limited field of degree 8 on a 24-node grid."""
    grid = gauss_hermite_grid(24, 1)
    return random_band_limited(rng_for(0, 0), grid, 8, 2)
