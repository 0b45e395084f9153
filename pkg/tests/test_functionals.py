import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from masslab.certify import fd_check
from masslab.errors import ModelError
from masslab.families import dilation_family
from masslab.functionals import (
    Model,
    ModelKind,
    Potential,
    energy,
    gn_gap,
    kinetic,
    pohozaev_residual,
    power_integral,
)
from masslab.grid import Field, build_grid
from masslab.minimize import lagrange_multiplier


def test_potentials():
    r = np.array([0.0, 1.0, 2.0])
    h = Potential.harmonic(2.0)
    assert np.allclose(h(r), 2 * r**2)
    assert np.allclose(h.virial(r), 4 * r**2)
    assert h.confining
    g = Potential.gaussian(3.0, 0.5)
    assert np.allclose(g(r), 3 * np.exp(-((r / 0.5) ** 2)))
    assert np.allclose(g.virial(r), -2 * (r / 0.5) ** 2 * g(r))
    assert not g.confining
    assert g.bound == pytest.approx(3.0)


def test_table_potential_matches_samples():
    r = np.linspace(0, 5, 41)
    t = Potential.table(r, np.exp(-r), confining=False)
    x = np.linspace(0, 5, 7)
    assert np.allclose(t(x), np.exp(-x), atol=1e-5)


@pytest.mark.parametrize(
    "build",
    [
        lambda: Model(ModelKind.SP, 2),
        lambda: Model.nls(4),
        lambda: Model.nls_decaying(3, -1.0),
        lambda: Model.sp_confined(Potential.gaussian()),
    ],
)
def test_model_validation(build):
    with pytest.raises(Exception):
        build()


def test_exponents():
    assert Model.sp().exponent == pytest.approx(10 / 3)
    assert Model.nls(1).exponent == 6
    assert Model.nls(2).exponent == 4


def test_energy_composition(grid3):
    u = Field(grid3, np.exp(-grid3.nodes**2)).normalized(10.0)
    e = energy(Model.sp(), u)
    assert e.total == pytest.approx(e.A + e.B - e.C)
    ec = energy(Model.sp_confined(), u)
    assert ec.total == pytest.approx(ec.A + ec.B + ec.D - ec.C)
    assert ec.D > 0
    en = energy(Model.nls(3), u)
    assert en.B == 0 and en.total == pytest.approx(en.A - en.C)
    assert e.A == pytest.approx(kinetic(u))
    assert e.C == pytest.approx(power_integral(u, 10 / 3) * 3 / 10)


def test_dimension_mismatch():
    g = build_grid(2, 10.0, 128)
    with pytest.raises(ModelError):
        energy(Model.sp(), Field(g, np.exp(-g.nodes**2)))


@pytest.mark.parametrize("name", ["sp", "sp_confined", "nls", "decaying"])
def test_gradients_by_differences(name, grid3, decaying):
    model = {
        "sp": Model.sp(),
        "sp_confined": Model.sp_confined(),
        "nls": Model.nls(3),
        "decaying": decaying,
    }[name]
    assert max(fd_check(model, grid3, pairs=4, seed=11)) < 1e-6


@pytest.mark.parametrize("dim", [1, 2])
def test_gradients_lower_dimensions(dim):
    assert max(fd_check(Model.nls(dim), build_grid(dim), pairs=4, seed=3)) < 1e-6


@pytest.mark.parametrize("fixture", ["gs1", "gs2", "gs3"])
def test_pohozaev_at_ground_state(fixture, request):
    gs = request.getfixturevalue(fixture)
    model = Model.nls(gs.dim)
    lam = lagrange_multiplier(model, gs.profile)
    scale = power_integral(gs.profile, model.exponent)
    assert abs(pohozaev_residual(model, gs.profile, lam)) < 1e-8 * scale


@settings(max_examples=20, deadline=None)
@given(t=st.floats(0.25, 4.0), c=st.floats(1.0, 80.0))
def test_scaling_laws(t, c, grid3):
    u = Field(grid3, np.exp(-grid3.nodes**2)).normalized(c)
    e0 = energy(Model.sp(), u)
    e1 = energy(Model.sp(), dilation_family(u, c, t).field)
    assert e1.A == pytest.approx(t * t * e0.A, rel=1e-10)
    assert e1.C == pytest.approx(t * t * e0.C, rel=1e-10)
    assert e1.B == pytest.approx(t * e0.B, rel=1e-8)
    assert e1.mass == pytest.approx(c, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(w=st.floats(0.3, 3.0), k=st.floats(0.0, 2.0), a=st.floats(-0.5, 0.5))
def test_gn_gap_nonnegative(w, k, a, gs3):
    r = gs3.grid.nodes
    u = Field(gs3.grid, gs3.grid.complete(np.exp(-((r / w) ** 2)) * (1 + a * np.cos(k * r))))
    assert gn_gap(u, gs3.cstar) > -1e-8
