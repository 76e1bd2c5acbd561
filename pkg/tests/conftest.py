import pathlib

import numpy as np
import pytest

from rdaplan.dynamics import AckermannParams, ControlBounds, ControlInput
from rdaplan.geometry import footprint_rectangle

SCENARIO_DIR = pathlib.Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def scenario_dir():
    return SCENARIO_DIR


@pytest.fixture
def params():
    return AckermannParams(L=2.5, dt=0.2)


@pytest.fixture
def bounds():
    return ControlBounds(ControlInput(-1.0, -0.5), ControlInput(4.0, 0.5),
                         ControlInput(-1.0, -0.3), ControlInput(1.0, 0.3))


@pytest.fixture
def footprint():
    return footprint_rectangle(3.0, 1.6)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
