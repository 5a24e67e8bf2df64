"""qell conftest."""
import pytest

from qell.exact_algebra import CoefficientRing, GradedRing
from qell.level_maps import level_data
from qell.weierstrass import tate_ring


@pytest.fixture
def ring():
    """Return Z[a1, a3] with the weights of the level-3 parameters."""
    return GradedRing.create(["a1", "a3"], [1, 3], name="Z[a1,a3]")


@pytest.fixture
def rationals():
    """Return Q[b], the parameter ring of the Tate curves over the rationals."""
    return tate_ring(CoefficientRing.rationals())


@pytest.fixture
def level3():
    """Return the shared data of level 3."""
    return level_data(3)


@pytest.fixture
def level5():
    """Return the shared data of level 5."""
    return level_data(5)
