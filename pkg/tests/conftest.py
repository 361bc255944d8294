import math

import pytest

from vaporimage import HGeometry, ObjectSpec, alpha_of, make_grid, make_object

F = 0.25
LAMBDA = 795e-9
A_SLIT = 100e-6
D_WEAK = 1.5e-4
D_STRONG = 30e-4
ALPHA = alpha_of(A_SLIT, F, LAMBDA)

PROBES = {"A": (15e-6, 15e-6), "B": (0.0, 50e-6), "C": (100e-6, 0.0), "D": (100e-6, 100e-6)}


def rel_l2(a, b):
    import numpy as np

    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


@pytest.fixture(scope="session")
def grid1d():
    return make_grid(1, 4096, 40 * math.pi / ALPHA)


@pytest.fixture(scope="session")
def grid2d():
    return make_grid(2, 512, 256e-6)


@pytest.fixture(scope="session")
def h_object(grid2d):
    return make_object(ObjectSpec("h_with_cross"), grid2d)
