import math

import pytest

from pindex.symplectic import build_symmetry

PI = math.pi


@pytest.fixture
def P_quarter():
    """R(pi/2) <> R(pi/2), k = 4."""
    return build_symmetry((PI / 2, PI / 2), 4)


@pytest.fixture
def P_mixed():
    """R(pi/2) <> R(pi), k = 4."""
    return build_symmetry((PI / 2, PI), 4)
