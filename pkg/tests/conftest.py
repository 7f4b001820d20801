import pytest

from discrete_canonical.numerics import RealLineGrid
from discrete_canonical.template import build_template_table


@pytest.fixture(scope="session")
def fine_table():
    return build_template_table(RealLineGrid.symmetric(20, 1 / 256))


@pytest.fixture(scope="session")
def coarse_table():
    return build_template_table(RealLineGrid.symmetric(10, 1 / 64))
