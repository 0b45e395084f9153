import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from masslab.eigen import compute_mu1, constant_weight, rayleigh_quotient
from masslab.errors import ConfigurationError, DomainError
from masslab.functionals import Potential
from masslab.grid import Field, build_grid

# Richardson limit of 1024..4096-point solves (second-order convergence)
GAUSSIAN_MU1_R4 = 3.68842826


@pytest.mark.parametrize("R", [1.0, 2.0, 4.0])
def test_constant_weight_ball(R):
    res = compute_mu1(constant_weight(), R, 1024)
    assert res.mu1 == pytest.approx(math.pi**2 / R**2, rel=1e-6)
    assert res.weight_norm == pytest.approx(1.0, rel=1e-12)


def test_constant_weight_scales_inversely():
    assert compute_mu1(constant_weight(2.0), 4.0).mu1 == pytest.approx(math.pi**2 / 32, rel=1e-6)


def test_gaussian_weight(gaussian_mu1):
    assert gaussian_mu1 == pytest.approx(GAUSSIAN_MU1_R4, rel=1e-7)
    # a larger ball admits more test functions
    assert compute_mu1(Potential.gaussian(), 8.0).mu1 < gaussian_mu1


def test_eigenfunction():
    res = compute_mu1(Potential.gaussian(), 4.0, 512)
    phi = res.eigenfunction.values
    assert np.all(phi[:-1] > 0) and phi[-1] == 0
    assert rayleigh_quotient(Potential.gaussian(), res.eigenfunction) == pytest.approx(res.mu1, rel=1e-10)
    big = build_grid(3, 16.0, 2048)
    on = res.on_grid(big).values
    assert np.all(on[big.nodes >= 4.0] == 0)
    assert res.test_function(7.0).mass == pytest.approx(7.0, rel=1e-12)


def test_errors():
    with pytest.raises(ConfigurationError):
        compute_mu1(Potential.gaussian(), -1.0)
    r = np.linspace(0, 1, 5)
    with pytest.raises(DomainError):
        compute_mu1(Potential.table(r, np.zeros(5)), 4.0, 256)


@settings(max_examples=20, deadline=None)
@given(w=st.floats(0.3, 3.0), k=st.integers(1, 4))
def test_rayleigh_quotient_bounds_mu1(w, k):
    pot = Potential.gaussian()
    res = compute_mu1(pot, 4.0, 512)
    g = res.grid
    r = g.nodes
    u = Field(g, np.cos(math.pi * r / 8.0) ** k * np.exp(-((r / w) ** 2)))
    assert rayleigh_quotient(pot, u) >= res.mu1 * (1 - 1e-12)
