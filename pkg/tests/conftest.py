import numpy as np
import pytest

from kinhydro.collision import CollisionWorkspace
from kinhydro.velocity import build_grid


@pytest.fixture(scope="session")
def grid8():
    return build_grid(8, 6.0, 26)


@pytest.fixture(scope="session")
def ws8(grid8):
    return CollisionWorkspace(grid8)


@pytest.fixture(scope="session")
def grid8_s14():
    return build_grid(8, 5.0, 14)


@pytest.fixture(scope="session")
def ws8_s14(grid8_s14):
    return CollisionWorkspace(grid8_s14)


@pytest.fixture(scope="session")
def grid16():
    return build_grid(16, 6.0, 26)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
