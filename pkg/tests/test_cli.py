import json
import subprocess
import sys

import jsonschema
import pytest

from shatterkit import cli
from shatterkit.errors import CalibrationError

PROV = ("exact", "greedy-bound")


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "s.csv").write_text("1,0,0,0\n0,1,0,0\n0,0,1,0\n0,0,0,1\n")
    (tmp_path / "sq.json").write_text(json.dumps({"values": [[0, 0], [0, 2], [2, 0], [2, 2]]}))
    (tmp_path / "k.json").write_text(json.dumps({"vertices": [[2, 0], [-2, 0], [0, 2], [0, -2]]}))
    return tmp_path


def run(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def check_report(rep):
    jsonschema.validate(rep, cli.load_schema())
    for entry in rep["outputs"]["results"].values():
        p = entry["provenance"]
        assert p in PROV or (p.startswith("monte-carlo(") and "stderr" in entry)
    assert set(rep["provenance"]) >= {"seed", "version", "fixture"}


COMMANDS = [
    (["dim", "sq.json", "--t", "2", "--profile", "1,2,3"], {"v": 2}),
    (["entropy", "s.csv", "--t", "0.5"], {"packing": 4}),
    (["entropy", "s.csv", "--t", "0.5", "--greedy"], {}),
    (["cover", "sq.json", "--body", "cube", "--radius", "2"], {"lower": 1, "upper": 1}),
    (["cellcontent", "sq.json"], {"total": 9}),
    (["tree", "sq.json", "--gap", "2", "--compare"], {"leaves": 4, "cell_content": 9}),
    (["lorentz", "norm", "s.csv", "--phi", "power:1"], {"norms": [0.25] * 4}),
    (["lorentz", "compare", "--phi", "power:1", "--psi", "power:2", "--t", "0.5"], {}),
    (["gauss", "s.csv", "--samples", "2000", "--seed", "3"], {}),
    (["rad", "s.csv", "--samples", "2000"], {}),
    (["integral", "comb", "s.csv"], {"integral": 1.0}),
    (["integral", "dudley", "s.csv", "--samples", "500"], {}),
    (["nosudakov", "--n", "16", "--alpha-cap", "0.25", "--samples", "500"], {}),
    (["nosudakov", "--n", "16", "--alpha-cap", "0.25", "--samples", "500", "--route", "materialized"], {}),
    (["select", "discrepancy", "--n", "200", "--gamma", "0.5", "--k", "100", "--q", "2", "--trials", "50"], {}),
    (["select", "one-function", "s.csv", "--psi", "power:2", "--k", "3", "--C", "2", "--trials", "20"], {}),
    (["section", "k.json", "--M", "0.5"], {"holds": True}),
    (["section", "k.json", "--M", "0.5", "--sigma", "0"], {"max_l1": 2.0}),
]


@pytest.mark.parametrize("args,expect", COMMANDS, ids=[" ".join(a[:2]) for a, _ in COMMANDS])
def test_commands_emit_valid_reports(workdir, capsys, args, expect):
    code, rep, err = run(args, capsys)
    assert code == 0, err
    check_report(rep)
    assert rep["command"] == args[0]
    for key, value in expect.items():
        got = rep["outputs"]["results"][key]["value"]
        assert got == pytest.approx(value)


def test_comparison_value(workdir, capsys):
    _, rep, _ = run(["lorentz", "compare", "--phi", "power:1", "--psi", "power:2", "--t", "0.5"], capsys)
    assert rep["outputs"]["results"]["comparison"]["value"] == pytest.approx(4.0, rel=1e-9)


def test_infinite_values_are_strings(workdir, capsys):
    _, rep, _ = run(["lorentz", "compare", "--phi", "power:2", "--psi", "power:2", "--t", "1"], capsys)
    assert rep["outputs"]["results"]["comparison"]["value"] == "inf"


def test_manifest_replay_is_byte_identical(workdir, capsys):
    assert cli.main(["gauss", "s.csv", "--samples", "3000", "--seed", "11", "--out", "a.json",
                     "--save-manifest", "m.json"]) == 0
    assert cli.main(["replay", "m.json", "--out", "b.json"]) == 0
    assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()
    man = json.loads((workdir / "m.json").read_text())
    assert man["seed"] == 11 and man["sweep"] == [1, 2, 4, 8, 16] and man["fixture"]


def test_replay_rejects_other_fixture(workdir, capsys):
    (workdir / "m.json").write_text(json.dumps({"command": "dim", "parameters": {}, "seed": 0,
                                                "fixture": "old"}))
    assert cli.main(["replay", "m.json"]) == 3


def test_missing_file(workdir, capsys):
    code, _, err = run(["dim", "missing.json", "--t", "1"], capsys)
    assert code == 2 and "not found" in err and "missing.json" in err


def test_usage_errors(workdir, capsys, monkeypatch):
    assert run(["dim", "s.csv", "--t", "1", "--bogus"], capsys)[0] == 1
    assert run(["frobnicate"], capsys)[0] == 1
    assert run(["dim", "s.csv", "--t", "-1"], capsys)[0] == 1
    assert run(["dim", "s.csv", "--t", "1", "--threads", "0"], capsys)[0] == 1
    monkeypatch.setenv("SHATTERKIT_THREADS", "many")
    assert run(["dim", "s.csv", "--t", "1"], capsys)[0] == 1
    monkeypatch.setenv("SHATTERKIT_THREADS", "2")
    assert run(["dim", "s.csv", "--t", "1"], capsys)[0] == 0


def test_parse_error_is_computation_error(workdir, capsys):
    (workdir / "bad.csv").write_text("1,2\n3\n")
    code, _, err = run(["dim", "bad.csv", "--t", "1"], capsys)
    assert code == 2 and "row=2" in err


def test_verify_single_suite(workdir, capsys):
    code, rep, err = run(["verify", "--suite", "comparison-power-law"], capsys)
    assert code == 0 and rep["outputs"]["results"]["comparison-power-law"]["value"] is True
    assert "[PASS]" in err
    check_report(rep)


def test_verify_failure_exit_code(workdir, capsys, monkeypatch):
    from shatterkit import suites
    monkeypatch.setitem(suites.SUITES, "comparison-power-law",
                        lambda seed=None: suites.SuiteResult("comparison-power-law", False, "forced"))
    assert run(["verify", "--suite", "comparison-power-law"], capsys)[0] == 3


def test_calibration_drift_reported(workdir, capsys, monkeypatch):
    from shatterkit import suites
    real = suites.load_fixtures()
    real["observed"]["l2_over_tower"] = 9.0
    monkeypatch.setattr(suites, "load_fixtures", lambda: real)
    monkeypatch.setattr(suites, "observe_all", lambda seed=7: {**real["observed"], "l2_over_tower": 1.0})
    with pytest.raises(CalibrationError, match="l2_over_tower"):
        suites.calibration()
    code, _, err = run(["verify", "--suite", "calibration"], capsys)
    assert code == 3 and "l2_over_tower" in err


def test_console_script_entry_point(workdir):
    out = subprocess.run([sys.executable, "-m", "shatterkit.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "shatterkit" in out.stdout


def test_schema_rejects_untagged_numbers():
    bad = {"command": "x", "inputs": {}, "outputs": {"results": {"v": 3}},
           "provenance": {"seed": 0, "version": "0", "fixture": "f"}}
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, cli.load_schema())
