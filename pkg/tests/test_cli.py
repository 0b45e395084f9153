import csv
import json

import numpy as np
import pytest

from masslab import cli


@pytest.fixture
def cache(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path / "cache"))
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_ground_state_persists_and_caches(cache, capsys):
    code, out, _ = run(capsys, "ground-state", "--dim", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == cli.SCHEMA_VERSION
    assert doc["result"]["cstar"] == pytest.approx(np.sqrt(3) * np.pi / 2, abs=1e-8)
    assert (cache / "groundstate_N1.txt").exists()
    assert list((cache / "cache").iterdir())
    code, again, _ = run(capsys, "ground-state", "--dim", "1")
    assert again == out


def test_scan_csv(cache, capsys):
    code, out, _ = run(capsys, "scan", "--dim", "1", "--model", "nls", "--c-grid", "0.5,1.5", "--csv", "s.csv")
    assert code == 0
    doc = json.loads(out)
    rows = list(csv.reader((cache / "s.csv").open()))
    assert rows[0] == list(cli.CSV_COLUMNS)
    assert [r[2] for r in rows[1:]] == ["zero_not_attained", "minus_infinity"]
    assert all(r[-1] == doc["config_hash"] for r in rows[1:])
    # 17 significant digits round-trip exactly
    assert float(rows[1][0]) == doc["result"]["c_values"][0]


def test_config_hash_tracks_config(cache, capsys):
    _, a, _ = run(capsys, "mu1", "--radius", "2", "--points", "256")
    _, b, _ = run(capsys, "mu1", "--radius", "2", "--points", "256")
    _, c, _ = run(capsys, "mu1", "--radius", "3", "--points", "256")
    ha, hb, hc = (json.loads(x)["config_hash"] for x in (a, b, c))
    assert ha == hb != hc
    assert (cache / "mu1_eigenfunction.txt").exists()


def test_config_file(cache, capsys):
    (cache / "run.json").write_text(json.dumps({"radius": 2.0, "points": 256, "potential": "gaussian:2.0"}))
    code, out, _ = run(capsys, "--config", "run.json", "mu1")
    assert code == 0
    assert json.loads(out)["config"]["radius"] == 2.0
    (cache / "bad.json").write_text(json.dumps({"nonsense": 1}))
    code, _, err = run(capsys, "--config", "bad.json", "mu1")
    assert code == 2 and "unknown config keys" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["scan", "--model", "sp", "--c-grid", "1.1,0.5"],
        ["energy", "--model", "sp"],
        ["mu1", "--potential", "cosine"],
        ["minimize", "--model", "sp", "--dim", "2", "--mass", "1"],
    ],
)
def test_usage_errors(cache, capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["no-such-command"])
    assert info.value.code == 2


def test_numerical_failure_exit_1(cache, capsys):
    np.savetxt(cache / "zero.txt", np.column_stack([np.linspace(0, 5, 6), np.zeros(6)]))
    code, out, _ = run(capsys, "mu1", "--potential", "table:zero.txt", "--points", "128")
    assert code == 1
    diag = json.loads(out)
    assert diag["error"] == "DomainError"


def test_energy_of_q_is_zero_for_nls(cache, capsys):
    code, out, _ = run(capsys, "energy", "--model", "nls", "--dim", "1", "--mass", "1.0")
    res = json.loads(out)["result"]
    assert abs(res["total"]) < 1e-6 * res["A"]
    assert res["lagrange"] == pytest.approx(-1.0, abs=1e-8)
