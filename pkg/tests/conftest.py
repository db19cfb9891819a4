"""
Shared fixtures for the homogenization lab tests
"""
import numpy as np
import pytest

from src.grid import GridSpec
from src.operator import ConstantForce, TrigonometricForce, build_modified_force, check_coercivity


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def laminated_force():
    """c(y) = 1 + 0.5 sin(2 pi y)"""
    return TrigonometricForce.sinusoid(1.0, 0.5, [1], delta=0.1)


@pytest.fixture
def unit_force():
    return ConstantForce(1.0, n=1)


@pytest.fixture
def unit_modified(unit_force):
    return build_modified_force(unit_force, 3.0, check_coercivity(unit_force))


@pytest.fixture
def laminated_modified(laminated_force):
    return build_modified_force(laminated_force, 3.0, check_coercivity(laminated_force))


@pytest.fixture
def torus_64():
    return GridSpec.torus(1, 64)


@pytest.fixture
def box_256():
    return GridSpec.box(1, 256, 2.0, slope_cap=1.0)
