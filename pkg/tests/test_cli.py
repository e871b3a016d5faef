import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from thermogeo import cli
from thermogeo.acceptance import axisym_pressure_oracle
from thermogeo.errors import ParseError, ValidationError
from thermogeo.scenario import (SCHEMAS, dumps_csv, dumps_json, format_float, parse_scenario, run,
                                serialize_scenario, validate_scenario)

GOLDEN = Path(__file__).parent / "golden"
KINDS = sorted(SCHEMAS)


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc, indent=2))
    return p


# --- parsing and validation ----------------------------------------------------------

@pytest.mark.parametrize("kind", KINDS)
def test_golden_round_trip(kind):
    path = GOLDEN / f"{kind}.json"
    assert serialize_scenario(parse_scenario(path)) == path.read_text()


def test_minimal_flatness2d_is_valid(tmp_path):
    sc = parse_scenario(write(tmp_path, "a.json", {"kind": "flatness2d", "output_dir": "o",
                                                   "parameters": {"omega": "beta_log_r", "beta": -0.5}}))
    assert sc.kind == "flatness2d" and sc.parameters["beta"] == -0.5
    assert sc.parameters["n"] == 33  # defaults are filled
    assert sc.name == "a"


def test_defaults_make_canonical_form_unique(tmp_path):
    a = parse_scenario(write(tmp_path, "a.json", {"kind": "embed", "output_dir": "o", "parameters": {}}))
    b = parse_scenario(write(tmp_path, "b.json", {"output_dir": "o", "kind": "embed",
                                                  "parameters": {"beta": -0.5, "samples": 1000}}))
    assert serialize_scenario(a) == serialize_scenario(b)


def test_missing_mu_is_named(tmp_path):
    doc = {"kind": "axisym", "output_dir": "o", "parameters": {"R1": 1.0, "R2": 2.0, "alpha": 0.5}}
    with pytest.raises(ValidationError, match="mu"):
        parse_scenario(write(tmp_path, "m.json", doc))


def test_unknown_key_reports_line(tmp_path):
    text = '{\n  "kind": "axisym",\n  "parameters": {"bogus": 1},\n  "output_dir": "o"\n}\n'
    with pytest.raises(ValidationError, match=r"bogus.*line 3"):
        parse_scenario(write(tmp_path, "u.json", text))
    with pytest.raises(ValidationError, match="extra"):
        validate_scenario({"kind": "embed", "parameters": {}, "output_dir": "o", "extra": 1})


@pytest.mark.parametrize("params, fragment", [
    ({"beta": "big"}, "expected a number"),
    ({"samples": 2.5}, "expected an integer"),
    ({"samples": 1}, "at least"),
    ({"R0": 2.0, "R1": 1.0}, "must exceed"),
    ({"gamma": -1.0}, "positive"),
    ({"beta": float("nan")}, "finite"),
])
def test_invalid_values(params, fragment):
    with pytest.raises(ValidationError, match=fragment):
        validate_scenario({"kind": "embed", "parameters": params, "output_dir": "o"})


def test_invalid_kind_and_shape():
    with pytest.raises(ValidationError, match="kind"):
        validate_scenario({"kind": "plasticity", "parameters": {}, "output_dir": "o"})
    with pytest.raises(ValidationError):
        validate_scenario([1, 2])
    with pytest.raises(ValidationError, match="output_dir"):
        validate_scenario({"kind": "embed", "parameters": {}, "output_dir": ""})


def test_malformed_json_reports_position(tmp_path):
    with pytest.raises(ParseError, match=r"line 2 column"):
        parse_scenario(write(tmp_path, "bad.json", '{"kind": "embed",\n "parameters": {,}}'))
    with pytest.raises(ParseError, match="cannot read"):
        parse_scenario(tmp_path / "missing.json")


# --- formatting ----------------------------------------------------------------------

def test_float_formatting():
    assert format_float(1.0) == "1.000000000000e+00"
    assert format_float(-2.5e-7) == "-2.500000000000e-07"
    csv = dumps_csv({"x": np.array([0.0, 1.0]), "y": np.array([2.0, 3.0])})
    assert csv == "x,y\n0.000000000000e+00,2.000000000000e+00\n1.000000000000e+00,3.000000000000e+00\n"
    assert json.loads(dumps_json({"b": 1.5, "a": [1, "s", None]})) == {"a": [1, "s", None], "b": 1.5}
    assert dumps_json({"b": 1, "a": 2}).index('"a"') < dumps_json({"b": 1, "a": 2}).index('"b"')


# --- running -----------------------------------------------------------------------------

def test_axisym_regression_golden(tmp_path):
    rep = run(parse_scenario(GOLDEN / "axisym.json"), tmp_path)
    text = (tmp_path / "solution.csv").read_text()
    header, *rows = text.splitlines()
    assert header == "R,r,p,P_rR,P_thTh"
    data = np.array([[float(v) for v in r.split(",")] for r in rows])
    assert data.shape == (257, 5)
    gold = np.loadtxt(GOLDEN / "axisym_solution.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(data, gold, rtol=1e-10, atol=1e-12)
    # the pressure column also agrees with the independent quadrature oracle
    oracle = axisym_pressure_oracle(data[:, 0], 1.0, data[0, 1], 1.0, 0.5, 0.2, 0.3, 0.0)
    assert np.max(np.abs(data[:, 2] - oracle)) < 1e-6
    report = json.loads((tmp_path / "report.json").read_text())
    assert set(report["residuals"]) == {"equilibrium", "incompressibility", "boundary"}
    assert "wall_time_ms" not in report
    assert sorted(Path(p).name for p in rep.artifact_paths) == ["report.json", "solution.csv"]
    assert all(Path(p).exists() for p in rep.artifact_paths)


@pytest.mark.parametrize("kind", KINDS)
def test_every_kind_runs(kind, tmp_path):
    rep = run(parse_scenario(GOLDEN / f"{kind}.json"), tmp_path)
    assert rep.verdicts and rep.passed()
    assert all(Path(p).exists() for p in rep.artifact_paths)
    for p in rep.artifact_paths:
        assert b"\r" not in Path(p).read_bytes()


def test_flatness3d_closed_form_is_flat(tmp_path):
    rep = run(parse_scenario(GOLDEN / "flatness3d.json"), tmp_path)
    assert rep.verdicts["flatness"] == "flat"


def test_flatness2d_verdicts(tmp_path):
    base = {"kind": "flatness2d", "output_dir": "o"}
    rep = run(validate_scenario({**base, "parameters": {"omega": "r_squared"}}), tmp_path)
    assert rep.verdicts["flatness"] == "not_flat"
    rep = run(validate_scenario({**base, "parameters": {"beta": 0.0}}), tmp_path)
    assert rep.verdicts["flatness"] == "flat"


def test_embed_writes_obj(tmp_path):
    run(parse_scenario(GOLDEN / "embed.json"), tmp_path)
    lines = (tmp_path / "surface.obj").read_text().splitlines()
    assert sum(ln.startswith("v ") for ln in lines) == 2000 * 64


def test_tolerance_override_changes_verdicts(tmp_path):
    sc = parse_scenario(GOLDEN / "axisym.json")
    assert run(sc, tmp_path).verdicts["equilibrium"] == "pass"
    rep = run(sc, tmp_path, tol=1e-30)
    assert rep.verdicts["equilibrium"] == "fail"
    assert json.loads((tmp_path / "report.json").read_text())["tolerance_override"] == 1e-30


# --- command line -------------------------------------------------------------------------

def thermogeo(*args, cwd, env=None):
    full_env = {k: v for k, v in os.environ.items() if k != "THERMOGEO_TOL"}
    full_env.update(env or {})
    return subprocess.run([sys.executable, "-m", "thermogeo.cli", *args], cwd=cwd, env=full_env,
                          capture_output=True, text=True, timeout=600)


def test_exit_codes(tmp_path, capsys):
    ok = write(tmp_path, "ok.json", json.loads((GOLDEN / "flatness3d.json").read_text()))
    assert cli.main(["run", str(ok), "--out", str(tmp_path / "o")]) == 0
    bad = write(tmp_path, "bad.json", {"kind": "axisym", "output_dir": "o",
                                       "parameters": {"R1": 1.0, "R2": 2.0, "alpha": 0.5}})
    assert cli.main(["run", str(bad)]) == 3
    assert "mu" in capsys.readouterr().err
    emb = write(tmp_path, "emb.json", {"kind": "embed", "output_dir": str(tmp_path / "e"),
                                       "parameters": {"beta": 1.0}})
    assert cli.main(["run", str(emb)]) == 2
    err = capsys.readouterr().err
    assert "-2/R < Omega'(R) < 0" in err
    assert cli.main(["run", str(ok), "--jobs", "0"]) == 3
    assert cli.main(["run", str(ok), "--tol", "-1"]) == 3


def test_env_tolerance_and_flag_precedence(tmp_path, monkeypatch):
    sc = str(GOLDEN / "axisym.json")
    out = tmp_path / "o"
    monkeypatch.setenv("THERMOGEO_TOL", "1e-30")
    assert cli.main(["run", sc, "--out", str(out)]) == 0
    assert json.loads((out / "report.json").read_text())["verdicts"]["equilibrium"] == "fail"
    assert cli.main(["run", sc, "--out", str(out), "--tol", "1.0"]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["tolerance_override"] == 1.0 and rep["verdicts"]["equilibrium"] == "pass"
    monkeypatch.setenv("THERMOGEO_TOL", "lots")
    assert cli.main(["run", sc, "--out", str(out)]) == 3


def test_batch_jobs_isolated_and_deterministic(tmp_path):
    names = ["axisym", "flatness2d", "linearized"]
    files = [str(GOLDEN / f"{k}.json") for k in names]
    r1 = thermogeo("run", *files, "--jobs", "3", "--out", "a", cwd=tmp_path)
    r2 = thermogeo("run", *files, "--jobs", "1", "--out", "b", cwd=tmp_path)
    assert r1.returncode == 0 and r2.returncode == 0, r1.stderr + r2.stderr
    for k in names:
        a, b = sorted((tmp_path / "a" / k).iterdir()), sorted((tmp_path / "b" / k).iterdir())
        assert [p.name for p in a] == [p.name for p in b] and a
        for pa, pb in zip(a, b):
            assert pa.read_bytes() == pb.read_bytes()
    assert "ms" in r1.stdout  # wall time is reported on the console only


def test_batch_default_directories(tmp_path):
    files = [str(GOLDEN / "flatness2d.json"), str(GOLDEN / "flatness3d.json")]
    r = thermogeo("run", *files, cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "out" / "flatness2d" / "flatness2d" / "report.json").exists()
    dup = thermogeo("run", files[0], files[0], cwd=tmp_path)
    assert dup.returncode == 3


def test_env_tolerance_in_subprocess(tmp_path):
    r = thermogeo("run", str(GOLDEN / "axisym.json"), "--out", "o", cwd=tmp_path,
                  env={"THERMOGEO_TOL": "1e-30"})
    assert r.returncode == 0
    assert json.loads((tmp_path / "o" / "report.json").read_text())["tolerance_override"] == 1e-30


def test_repeated_runs_byte_identical(tmp_path):
    for d in ("x", "y"):
        assert thermogeo("run", str(GOLDEN / "inverse_alpha.json"), "--out", d, cwd=tmp_path).returncode == 0
    xs, ys = sorted((tmp_path / "x").iterdir()), sorted((tmp_path / "y").iterdir())
    assert [p.name for p in xs] == [p.name for p in ys] and len(xs) >= 2
    for a, b in zip(xs, ys):
        assert a.read_bytes() == b.read_bytes()
