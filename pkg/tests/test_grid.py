import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from masslab.errors import ConfigurationError, DomainError, ShapeError
from masslab.grid import Field, ball_volume, build_grid, dilate, integrate, radial_laplacian, sphere_area


@pytest.mark.parametrize("dim,exact", [(1, math.sqrt(math.pi)), (2, math.pi), (3, math.pi**1.5)])
def test_gaussian_quadrature(dim, exact):
    g = build_grid(dim)
    assert integrate(g, np.exp(-g.nodes**2)) == pytest.approx(exact, rel=1e-10)


def test_sphere_constants():
    assert sphere_area(1) == 2.0
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert ball_volume(3, 2.0) == pytest.approx(32 * math.pi / 3)


def test_kink_is_second_order():
    # the even extension of e^{-2|x|} has a kink at the origin
    errs, hs = [], []
    for m in (1024, 2048, 4096):
        g = build_grid(1, 20.0, m)
        errs.append(abs(integrate(g, np.exp(-2 * g.nodes)) - 1.0))
        hs.append(g.h)
    for e, h in zip(errs, hs):
        assert e < 0.5 * h**2
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_laplacian_of_gaussian(dim):
    g = build_grid(dim)
    r = g.nodes
    lap = radial_laplacian(Field(g, np.exp(-(r**2)))).values
    exact = (4 * r**2 - 2 * dim) * np.exp(-(r**2))
    inner = (r > 0.5) & (r < 0.9 * g.r_max)
    assert np.max(np.abs(lap[inner] - exact[inner])) < 1e-6


def test_stiffness_is_kinetic_form(grid3):
    g = grid3
    u = g.complete(np.exp(-(g.nodes**2)))
    exact = quad(lambda r: 4 * r**2 * np.exp(-2 * r**2) * 4 * np.pi * r**2, 0, np.inf)[0]
    assert u @ (g.stiffness @ u) == pytest.approx(exact, rel=1e-9)
    k = g.stiffness
    assert abs(k - k.T).max() < 1e-14 * abs(k).max()


def test_validation():
    with pytest.raises(ConfigurationError):
        build_grid(4)
    g = build_grid(1, 10.0, 64)
    with pytest.raises(ShapeError):
        integrate(g, np.ones(3))
    with pytest.raises(DomainError):
        dilate(Field(g, np.ones(64)), 0.0)
    with pytest.raises(DomainError):
        Field(g, np.zeros(64)).normalized(1.0)


def test_dilation_truncation_is_flagged():
    g = build_grid(3, 8.0, 512)
    u = Field(g, np.exp(-(g.nodes**2) / 4))
    out = dilate(u, 0.25)
    assert out.meta.get("truncated")


@settings(max_examples=25, deadline=None)
@given(width=st.floats(0.5, 1.5), t=st.floats(0.5, 2.0))
def test_dilation_preserves_mass(width, t):
    g = build_grid(3, 16.0, 1024)
    u = Field(g, np.exp(-((g.nodes / width) ** 2)))
    assert dilate(u, t).mass == pytest.approx(u.mass, rel=1e-6)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), c=st.floats(0.1, 100))
def test_quadrature_linear_and_normalization(a, b, c):
    g = build_grid(2, 12.0, 256)
    f1, f2 = np.exp(-g.nodes), np.exp(-(g.nodes**2))
    lhs = integrate(g, a * f1 + b * f2)
    assert lhs == pytest.approx(a * integrate(g, f1) + b * integrate(g, f2), abs=1e-12)
    assert Field(g, f1).normalized(c).mass == pytest.approx(c, rel=1e-13)


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0.5, 2.0), b=st.floats(0.5, 2.0), k=st.floats(0.0, 2.0))
def test_laplacian_symmetric(a, b, k):
    g = build_grid(3, 16.0, 1024)
    r = g.nodes
    u = Field(g, g.complete(np.exp(-((r / a) ** 2))))
    v = Field(g, g.complete(np.cos(k * r) * np.exp(-((r / b) ** 2))))
    lhs, rhs = radial_laplacian(u).inner(v), u.inner(radial_laplacian(v))
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)
    assert radial_laplacian(u).inner(u) < 0
