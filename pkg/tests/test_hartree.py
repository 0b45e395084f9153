import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from masslab.errors import ModelError
from masslab.grid import Field, build_grid
from masslab.hartree import coulomb_potential, hartree_energy, hartree_gradient


@pytest.fixture(scope="module")
def gauss(grid3):
    return Field(grid3, np.exp(-0.5 * grid3.nodes**2))


def test_erf_potential(gauss):
    r = gauss.grid.nodes
    phi = coulomb_potential(gauss).phi.values
    exact = np.where(r > 0, math.pi**1.5 * erf(r) / np.where(r > 0, r, 1), 2 * math.pi)
    assert np.max(np.abs(phi - exact) / exact) < 1e-6


def test_energy_closed_form(gauss):
    # 1/4 int phi u^2 = pi^(5/2) / (2 sqrt 2) for u^2 = e^{-r^2}
    assert hartree_energy(gauss) == pytest.approx(math.pi**2.5 / (2 * math.sqrt(2)), rel=1e-8)


def test_far_field(grid3):
    r = grid3.nodes
    bump = Field(grid3, np.where(r < 1, (1 - r**2) ** 3, 0.0))
    phi = coulomb_potential(bump).phi.values
    outside = r > 1.5
    assert np.allclose(r[outside] * phi[outside], bump.mass, rtol=1e-8)


def test_potential_positive_decreasing(gauss):
    phi = coulomb_potential(gauss).phi.values
    assert np.all(phi > 0)
    assert np.all(np.diff(phi) < 0)


def test_gradient_matches_differences(gauss):
    g = gauss.grid
    v = g.complete(np.exp(-((g.nodes - 1.0) ** 2)))
    eps = 1e-5
    fd = (hartree_energy(gauss.with_values(gauss.values + eps * v)) - hartree_energy(gauss.with_values(gauss.values - eps * v))) / (2 * eps)
    an = float(g.weights @ (hartree_gradient(gauss) * v))
    assert fd == pytest.approx(an, rel=1e-8)


def test_requires_three_dimensions():
    g = build_grid(2, 10.0, 128)
    with pytest.raises(ModelError):
        hartree_energy(Field(g, np.exp(-g.nodes**2)))


@settings(max_examples=15, deadline=None)
@given(s=st.floats(0.3, 3.0))
def test_mass_scaling(s):
    # B is quartic in u
    g = build_grid(3, 16.0, 1024)
    u = Field(g, np.exp(-(g.nodes**2)))
    assert hartree_energy(u.scaled(s)) == pytest.approx(s**4 * hartree_energy(u), rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(t=st.floats(0.5, 2.0))
def test_dilation_scaling(t):
    g = build_grid(3, 16.0, 2048)
    u = Field(g, np.exp(-0.5 * g.nodes**2))
    from masslab.grid import dilate

    assert hartree_energy(dilate(u, t)) == pytest.approx(t * hartree_energy(u), rel=1e-6)
