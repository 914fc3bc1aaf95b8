"""
Fixtures compartidas: perfiles de referencia y sus pares fundamentales
"""
import math

import pytest

from models.frequency import FrequencyProfile, PhysicalParams
from models.fundamental import solve_fundamental


@pytest.fixture
def params():
    return PhysicalParams()


@pytest.fixture(scope="session")
def quarter_pair():
    """ω = 1 en [0, π/2]: D_a(t_b) = 1"""
    return solve_fundamental(FrequencyProfile.constant(1.0, 0.0, math.pi / 2), 1024)


@pytest.fixture(scope="session")
def unit_pair():
    """ω = 1 en [0, 1]"""
    return solve_fundamental(FrequencyProfile.constant(1.0, 0.0, 1.0), 1024)


@pytest.fixture(scope="session")
def free_pair():
    """Partícula libre Ω ≡ 0 en [0, 1]"""
    return solve_fundamental(FrequencyProfile.constant(0.0, 0.0, 1.0), 1024)


@pytest.fixture(scope="session")
def ramp_pair():
    """Ω(t) = 1 + t en [0, 1]"""
    return solve_fundamental(FrequencyProfile.polynomial((1.0, 1.0), 0.0, 1.0), 1024)
