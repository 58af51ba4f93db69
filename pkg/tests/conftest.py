import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from patrecon.geometry import Grid, Medium, make_sensor_array
from patrecon.wavesim import make_sim_config


@pytest.fixture
def grid128():
    return Grid(128, 128, 1e-4)


@pytest.fixture
def grid64():
    return Grid(64, 64, 1e-4)


@pytest.fixture
def medium():
    return Medium()


@pytest.fixture
def setup64(grid64, medium):
    """Small imaging setup used by most operator tests."""
    sensors = make_sensor_array(grid64, 32, 60)
    cfg = make_sim_config(grid64, sensors, medium)
    return grid64, medium, sensors, cfg


@pytest.fixture
def setup_tiny():
    """8 sensors on a 32x32 grid; cheap enough for exhaustive checks."""
    grid = Grid(32, 32, 1e-4)
    medium = Medium()
    sensors = make_sensor_array(grid, 8, 24)
    cfg = make_sim_config(grid, sensors, medium)
    return grid, medium, sensors, cfg


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
