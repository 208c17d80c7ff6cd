import numpy as np
import pytest

from grasshopper.grid import build_grid
from grasshopper.kernel import build_index


@pytest.fixture(scope="session")
def grid2():
    return build_grid(2)


@pytest.fixture(scope="session")
def grid3():
    return build_grid(3)


@pytest.fixture(scope="session")
def grid4():
    return build_grid(4)


@pytest.fixture(scope="session")
def index_for():
    """Memoised kernel indexes keyed by (grid depth, theta)."""
    cache = {}

    def get(grid, theta):
        key = (grid.depth, float(theta))
        if key not in cache:
            cache[key] = build_index(grid, theta)
        return cache[key]

    return get


def brute_total(grid, theta, colouring):
    """Direct double-sum of the success probability; no kernel index.

    Row-by-row evaluation of the defining formula, the oracle all fast
    paths are checked against.
    """
    from grasshopper.grid import central_angles

    s = colouring.expand(grid)
    h = grid.h
    total = 0.0
    for i in range(grid.n_points):
        ang = central_angles(grid.points[i], grid.points)
        u = np.abs(ang - theta) / h
        w = np.where(u < 2.0, 0.25 * (1.0 + np.cos(0.5 * np.pi * u)), 0.0)
        total += s[i] * float(np.dot(w, s)) / float(np.sum(w))
    return total / grid.n_pairs


def band_oracle_row(grid, theta, i):
    """Band membership and weights of point i by direct enumeration."""
    from grasshopper.grid import central_angles

    ang = central_angles(grid.points[i], grid.points)
    u = np.abs(ang - theta) / grid.h
    w = np.where(u < 2.0, 0.25 * (1.0 + np.cos(0.5 * np.pi * u)), 0.0)
    idx = np.nonzero(w > 0.0)[0]
    return idx, w[idx]
