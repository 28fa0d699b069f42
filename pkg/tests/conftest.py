from functools import lru_cache

import numpy as np
import pytest

from nodalab.geometry import BoundaryData, boundary_angle, build_disk_domain, build_polygon_domain
from nodalab.solver import solve_p_laplace

UNIT_SQUARE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
L_SHAPE = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]


@lru_cache(maxsize=None)
def disk(h: float):
    return build_disk_domain(1.0, h)


@lru_cache(maxsize=None)
def square(h: float):
    return build_polygon_domain(UNIT_SQUARE, h)


@lru_cache(maxsize=None)
def disk_solution(p: float, k: int, h: float = 1 / 32):
    """Solved field for ``g = sin(k theta)`` on the unit disk."""
    dom = disk(h)
    g = BoundaryData(np.sin(k * boundary_angle(dom)))
    return dom, g, solve_p_laplace(dom, g, p)


@pytest.fixture(scope="session")
def disk32():
    return disk(1 / 32)


@pytest.fixture(scope="session")
def square16():
    return square(1 / 16)
