import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from masslab.errors import DomainError, TruncationError
from masslab.families import (
    certify_divergence,
    cutoff_family,
    cutoff_witness,
    dilation_family,
    dilation_probe,
    mass_scale,
    ramp,
    scaled_Q_closed_form,
    scaled_Q_family,
    scaled_Q_witness,
)
from masslab.functionals import Model, energy
from masslab.grid import Field
from masslab.groundstate import hartree_of_Q


@pytest.mark.parametrize("s", [0.5, 1.1, 1.5])
@pytest.mark.parametrize("t", [0.25, 1.0, 8.0, 64.0])
def test_scaled_q_closed_form(gs3, s, t):
    c = s * gs3.cstar
    e = energy(Model.sp(), scaled_Q_family(gs3, c, t).field)
    expected = scaled_Q_closed_form(gs3.integrals["grad2"] / 2, hartree_of_Q(gs3), c, gs3.cstar, t)
    assert e.total == pytest.approx(expected, rel=1e-6, abs=1e-6 * e.A)
    assert e.mass == pytest.approx(c, rel=1e-12)


def test_ramp():
    x = np.linspace(0, 3, 301)
    y = ramp(x)
    assert np.all(y[x <= 1] == 1) and np.all(y[x >= 2] == 0)
    assert np.all(np.diff(y) <= 0)
    d = np.gradient(y, x)
    assert abs(d[100]) < 1e-3 and abs(d[200]) < 1e-3


def test_cutoff_normalization_tends_to_one(gs3):
    a = [cutoff_family(gs3, gs3.cstar, rho).normalization for rho in (1, 2, 4, 8)]
    assert all(x >= 1 for x in a)
    assert all(abs(y - 1) < abs(x - 1) for x, y in zip(a, a[1:]))
    assert abs(a[-1] - 1) < 1e-7


def test_cutoff_mass_exact(gs3):
    p = cutoff_family(gs3, 50.0, 3.0)
    assert p.field.mass == pytest.approx(50.0, rel=1e-13)
    with pytest.raises(DomainError):
        cutoff_family(gs3, 50.0, 0.5)


def test_certify_divergence_rules():
    t = [2.0**k for k in range(10)]
    falling = [-(4.0**k) for k in range(10)]
    assert certify_divergence(t, falling).certified
    assert not certify_divergence(t, [float(k) for k in range(10)]).certified
    # too shallow: final value must drop below -1e3 (|E0| + 1)
    shallow = [-1.0 - 0.01 * k for k in range(10)]
    assert not certify_divergence(t, shallow).certified


def test_witnesses_by_threshold(gs3):
    sp = Model.sp()
    assert scaled_Q_witness(sp, gs3, 1.1 * gs3.cstar).certified
    assert not scaled_Q_witness(sp, gs3, 0.9 * gs3.cstar).certified
    conf = Model.sp_confined()
    assert cutoff_witness(conf, gs3, 1.2 * gs3.cstar).certified
    assert not cutoff_witness(conf, gs3, 0.9 * gs3.cstar).certified


def test_dilation_probe_tends_to_zero(gs3):
    c = 0.5 * gs3.cstar
    probes = dilation_probe(Model.sp(), scaled_Q_family(gs3, c, 1.0).field, c)
    assert all(b < a for a, b in zip(probes, probes[1:]))
    assert 0 <= probes[-1] < 1e-2 * probes[0]


def test_resampled_dilation_truncates(grid3):
    u = Field(grid3, np.exp(-grid3.nodes**2)).normalized(1.0)
    with pytest.raises(TruncationError):
        dilation_family(u, 1.0, 0.05, resample=True)
    with pytest.raises(DomainError):
        dilation_family(u, 2.0, 1.0)


@settings(max_examples=20, deadline=None)
@given(t=st.floats(0.1, 10.0), theta=st.floats(0.1, 5.0))
def test_mass_bookkeeping(t, theta, grid3):
    u = Field(grid3, np.exp(-grid3.nodes**2)).normalized(3.0)
    assert dilation_family(u, 3.0, t).field.mass == pytest.approx(3.0, rel=1e-12)
    assert mass_scale(u, theta).mass == pytest.approx(3.0 * theta, rel=1e-12)


def test_threshold_member_is_linear_in_t(gs3):
    # at c = c* the t^2 coefficient vanishes
    b = hartree_of_Q(gs3)
    for t in (1.0, 2.0, 4.0, 8.0):
        e = energy(Model.sp(), scaled_Q_family(gs3, gs3.cstar, t).field).total
        assert e / t == pytest.approx(b, rel=1e-4)


@pytest.mark.xfail(
    strict=True,
    reason="E(Q^t) = -22.3 t^2 + 1827 t at 1.5 c*: the vertex sits at t ~ 41, so t = 1..64 is not monotone "
    "and E(Q^64) > 0; the witness doubles further (up to 2^24)",
)
def test_short_doubling_run_at_one_and_a_half(gs3):
    es = [energy(Model.sp(), scaled_Q_family(gs3, 1.5 * gs3.cstar, 2.0**k).field).total for k in range(7)]
    assert all(b < a for a, b in zip(es, es[1:]))
    assert es[-1] < -1e3 * abs(es[0])
