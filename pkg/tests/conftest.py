import math

import pytest

from thzreflect import SubstrateSpec, generate_layout


@pytest.fixture(scope="session")
def su8():
    """Reference substrate: 2.3 um dielectric with eps_r 2.75."""
    return SubstrateSpec(relative_permittivity=2.75, thickness=2.3e-6)


@pytest.fixture(scope="session")
def panel85(su8):
    """Full 85 x 85 panel steering to 30 degrees at 1 THz."""
    return generate_layout(85, 85, 1e12, su8, math.pi / 2)


@pytest.fixture(scope="session")
def row85(su8):
    return generate_layout(1, 85, 1e12, su8, math.pi / 2)
