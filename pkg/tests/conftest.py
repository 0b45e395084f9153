import pytest

from masslab.eigen import compute_mu1
from masslab.functionals import Model, Potential
from masslab.grid import build_grid
from masslab.groundstate import solve_ground_state

_CACHE = {}


def ground_state(dim):
    if dim not in _CACHE:
        _CACHE[dim] = solve_ground_state(dim)
    return _CACHE[dim]


@pytest.fixture(scope="session")
def gs1():
    return ground_state(1)


@pytest.fixture(scope="session")
def gs2():
    return ground_state(2)


@pytest.fixture(scope="session")
def gs3():
    return ground_state(3)


@pytest.fixture(scope="session")
def grid3():
    return build_grid(3)


@pytest.fixture(scope="session")
def gaussian_mu1():
    return compute_mu1(Potential.gaussian(), 4.0, 1024).mu1


@pytest.fixture(scope="session")
def decaying(gaussian_mu1):
    return Model.nls_decaying(3, 1.5 * gaussian_mu1)
