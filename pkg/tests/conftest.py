import math

import numpy as np
import pytest

from stokeslab import build_ladder, make_grid


@pytest.fixture
def grid():
    """Standard small slab: 2pi x 2pi torus, z in [-8, 8]."""
    return make_grid(32, 32, 2 * math.pi, 2 * math.pi, 65, -8.0, 8.0)


@pytest.fixture
def ladder(grid):
    return build_ladder(grid)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
