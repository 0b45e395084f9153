"""Every acceptance criterion at its stated tolerance.

Each test prints one line "[PASS] n title" / "[FAIL] n title"; the literal
continuity bound is an expected failure (see the note it prints).
"""

import os
import subprocess
import sys

import pytest

from masslab.certify import (
    PASS,
    Context,
    c1_identities,
    c2_closed_form,
    c3_cross_solver,
    c4_gn,
    c5_hartree,
    c6_sp_map,
    c7_confined_map,
    c8_curve,
    c9_nls,
    c10_decaying,
    c11_gradients,
)

from conftest import ground_state


@pytest.fixture(scope="module")
def ctx():
    return Context(seed=0, ground_state_loader=ground_state)


@pytest.fixture(scope="module")
def curve(ctx):
    return {r.number: r for r in c8_curve(ctx)}


def report(result, capsys):
    with capsys.disabled():
        print(f"\nACCEPTANCE {result.line()}  {result.values if len(str(result.values)) < 400 else ''}")
        if result.note:
            print(f"    note: {result.note}")
    return result


@pytest.mark.parametrize(
    "criterion",
    [c1_identities, c2_closed_form, c3_cross_solver, c4_gn, c5_hartree, c6_sp_map, c7_confined_map, c9_nls, c10_decaying, c11_gradients],
    ids=lambda f: f.__name__,
)
def test_criterion(ctx, criterion, capsys):
    result = report(criterion(ctx), capsys)
    assert result.status == PASS, result.values


@pytest.mark.parametrize("number", ["8a", "8b", "8c"])
def test_curve(curve, number, capsys):
    result = report(curve[number], capsys)
    assert result.status == PASS, result.values


@pytest.mark.xfail(
    strict=True,
    reason="|I_{c+d} - I_c| ~ d |I'(c)| with I'(c) > 0, so the fixed 10x-tolerance bound is unattainable at d = 0.01 c",
)
def test_continuity_literal_bound(curve, capsys):
    result = curve["8d"]
    with capsys.disabled():
        status = "PASS" if result.status == PASS else "FAIL (expected)"
        print(f"\nACCEPTANCE [{status}]  8d {result.title}  {result.values}")
    assert result.status == PASS


def test_determinism(tmp_path, capsys):
    env = dict(os.environ, MASSLAB_CACHE=str(tmp_path / "cache"))
    outs = []
    for k in range(2):
        path = tmp_path / f"certify{k}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "masslab.cli", "certify", "--seed", "0", "--json", str(path)],
            env=env,
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        outs.append(path.read_bytes())
    ok = outs[0] == outs[1]
    with capsys.disabled():
        print(f"\nACCEPTANCE [{'PASS' if ok else 'FAIL'}]  12 determinism (two certify runs byte-identical, {len(outs[0])} bytes)")
    assert ok
