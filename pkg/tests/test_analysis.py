import numpy as np
import pytest

from masslab.analysis import (
    ScanResult,
    coercivity_probe,
    monotonicity_check,
    scan,
    theta_scaling,
    threshold_structure_ok,
)
from masslab.config import SolverConfig
from masslab.errors import DomainError
from masslab.functionals import Model
from masslab.minimize import Classification, minimize_on_sphere

Z, A, M = Classification.ZERO_NOT_ATTAINED, Classification.ATTAINED, Classification.MINUS_INFINITY


def _result(cs, es, ks):
    return ScanResult(Model.sp_confined(), tuple(cs), tuple(es), tuple(ks), tuple([0.0] * len(cs)))


def test_threshold_structure():
    assert threshold_structure_ok(_result([1, 2, 3], [0, 0, -np.inf], [Z, Z, M]))
    assert not threshold_structure_ok(_result([1, 2, 3], [0, -np.inf, 0], [Z, M, Z]))


def test_monotonicity_on_synthetic_curves():
    cs = [1.0, 2.0, 3.0, 4.0]
    good = monotonicity_check(_result(cs, [c * c / c**0.5 for c in cs], [A] * 4), SolverConfig())
    assert good.passed
    flat = monotonicity_check(_result(cs, [c * c for c in cs], [A] * 4), SolverConfig())
    assert not flat.passed


def test_scan_validation(gs3):
    with pytest.raises(DomainError):
        scan(Model.sp(), [2.0, 1.0], gs3)
    with pytest.raises(DomainError):
        scan(Model.sp(), [], gs3)


def test_scan_rows_and_workers(gs3):
    cs = [0.5 * gs3.cstar, 1.5 * gs3.cstar]
    a = scan(Model.sp(), cs, gs3)
    b = scan(Model.sp(), cs, gs3, workers=2)
    assert a.classifications == b.classifications == (Z, M)
    rows = list(a.rows())
    assert rows[0][0] == cs[0] and rows[1][2] is M


def test_theta_scaling_identity(gs3, decaying):
    rep = minimize_on_sphere(decaying, 0.4 * gs3.cstar, "random", None, gs3.grid)
    out = theta_scaling(decaying, rep, 1.25)
    assert out["identity_residual"] < 1e-10
    assert out["strict"]


def test_coercivity_below_threshold(gs3):
    rep = coercivity_probe(Model.sp_confined(), 0.5 * gs3.cstar, gs3)
    assert rep.bound_holds and rep.increasing_tail
