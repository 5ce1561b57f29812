import json
import os
import subprocess
import sys

import pytest

from isingperc import cli

PLAN = {"lattice": "square", "model": {"family": "ferro", "beta": 0.8}, "seed": 3,
        "experiments": ["exp_theta", "exp_plus_sea", {"id": "exp_shift_invariance", "n": 20}],
        "L": [6, 8], "samples": 20, "theta_L": 6, "theta_n": 20}


def _run(tmp_path, plan, name):
    p = tmp_path / f"{name}.json"
    p.write_text(json.dumps(plan))
    out = tmp_path / name
    code = cli.main(["run", str(p), "--output", str(out)])
    return code, out


def test_plan_roundtrip_and_determinism(tmp_path):
    code, a = _run(tmp_path, PLAN, "a")
    assert code in (0, 1)
    _, b = _run(tmp_path, PLAN, "b")
    _, c = _run(tmp_path, dict(PLAN, workers=2), "c")
    ra = (a / "results.csv").read_bytes()
    assert ra == (b / "results.csv").read_bytes() == (c / "results.csv").read_bytes()
    assert (a / "summary.txt").exists()


def test_bad_plan_lists_every_error(tmp_path, capsys):
    bad = {"lattice": "moon", "model": {"family": "ferro", "beta": -1}, "bogus": 1}
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(bad))
    assert cli.main(["run", str(p)]) == 2
    err = capsys.readouterr().err
    assert "moon" in err and "bogus" in err and "seed" in err


def test_plan_rejects_unknown_override():
    with pytest.raises(cli.PlanError):
        cli.plan_from_dict(dict(PLAN, experiments=[{"id": "exp_theta", "nonsense": 1}]))


def test_output_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    p = tmp_path / "p.json"
    p.write_text(json.dumps(dict(PLAN, experiments=["exp_theta"])))
    cli.main(["run", str(p)])
    assert (tmp_path / "env" / "results.csv").exists()


def test_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert "exp_duplicated_circuit - " in out and "control_plus_sea_beta0" in out


def test_snapshot_from_config(tmp_path):
    cfg = {"lattice": "square", "L": 6, "model": {"family": "ferro", "beta": 0.7},
           "bc": {"orientation": "left"}, "seed": 1, "grid": str(tmp_path / "s.grid")}
    p = tmp_path / "s.json"
    p.write_text(json.dumps(cfg))
    assert cli.main(["snapshot", str(p), "--output", str(tmp_path / "s.pgm")]) == 0
    assert (tmp_path / "s.pgm").read_bytes().startswith(b"P5")
    assert cli.main(["snapshot", str(tmp_path / "s.grid")]) == 0
    assert (tmp_path / "s.pgm").exists()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "isingperc", "list"], capture_output=True, text=True)
    assert r.returncode == 0 and "exp_theta" in r.stdout
