import json

import numpy as np
import pytest

from liestab.cli import main
from liestab.scenarios import load_scenario, scenario_from_dict, ScenarioError


def run(args):
    return main(args)


def test_check_and_certify_tracking(tmp_path):
    out = tmp_path / "out"
    assert run(["check", "--builtin", "example-4.1", "--out", str(out)]) == 0
    report = json.loads((out / "check-example-4.1.json").read_text())
    assert report["ok"]
    assert run(["certify", "--builtin", "example-4.1", "--out", str(out)]) == 0
    cert = json.loads((out / "certificate-example-4.1.json").read_text())
    assert cert["kind"] == "nilpotent-semiglobal-exponential"
    assert cert["threshold"] == 0.5
    assert cert["consistent"]


def test_certify_solvable_route(tmp_path):
    out = tmp_path / "out"
    assert run(["certify", "--builtin", "example-6.1", "--horizon", "120",
                "--out", str(out)]) == 0
    cert = json.loads((out / "certificate-example-6.1.json").read_text())
    assert cert["kind"] == "solvable-attractivity"
    assert cert["rho_A"] == 0.75


def test_reproduce_and_determinism(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(["reproduce", "--builtin", "example-4.1", "--seed", "7",
                "--out", str(out1)]) == 0
    assert run(["reproduce", "--builtin", "example-4.1", "--seed", "7",
                "--out", str(out2)]) == 0
    csv1 = (out1 / "reproduce-example-4.1.csv").read_bytes()
    csv2 = (out2 / "reproduce-example-4.1.csv").read_bytes()
    assert csv1 == csv2
    lines = csv1.decode().strip().splitlines()
    header = lines[3].split(",")
    assert header[0] == "k" and "norm" in header
    final = lines[-1].split(",")
    e_final = np.array([float(v) for v in final[1:4]])
    assert np.linalg.norm(e_final) < 1e-6
    mirror = json.loads((out1 / "reproduce-example-4.1.json").read_text())
    assert mirror["seed"] == 7 and not mirror["diverged"]


def test_reproduce_solvable_decays(tmp_path):
    out = tmp_path / "out"
    assert run(["reproduce", "--builtin", "example-6.1", "--out", str(out)]) == 0
    data = json.loads((out / "reproduce-example-6.1.json").read_text())
    cols = data["columns"]
    rows = np.array(data["rows"])
    x1 = rows[-1, 1:7]
    x2 = rows[-1, 7:13]
    assert max(np.linalg.norm(x1), np.linalg.norm(x2)) < 1e-4


def test_deadbeat_command(tmp_path):
    out = tmp_path / "out"
    assert run(["deadbeat", "--builtin", "heisenberg-deadbeat", "--out", str(out)]) == 0
    payload = json.loads((out / "deadbeat-heisenberg-deadbeat.json").read_text())
    assert payload["horizon"] == 5
    assert payload["verified"]["ok"]


def test_exit_codes(tmp_path):
    out = tmp_path / "out"
    bad = tmp_path / "bad.json"
    bad.write_text('{"algebra": "heisenberg", "n": 1')
    assert run(["check", "--scenario", str(bad), "--out", str(out)]) == 2

    blowup = tmp_path / "blowup.json"
    blowup.write_text(json.dumps({
        "name": "blowup", "algebra": "abelian-3", "n": 1, "r": 1,
        "A": (2.0 * np.eye(3)).tolist(), "x0": [1.0, 0.0, 0.0],
        "horizon": 600, "signal": {"kind": "zero"}}))
    assert run(["simulate", "--scenario", str(blowup), "--out", str(out)]) == 3

    hot = tmp_path / "hot.json"
    hot.write_text(json.dumps({
        "name": "hot", "algebra": "heisenberg", "n": 1, "r": 1,
        "A": (0.6 * np.eye(3)).tolist(), "x0": [1.0, 0.0, 0.0], "horizon": 10,
        "signal": {"kind": "geometric", "base": [1.0, 2.0, 3.0], "ratio": 2.0},
        "route": "nilpotent"}))
    assert run(["certify", "--scenario", str(hot), "--out", str(out)]) == 1
    assert json.loads((out / "certificate-hot.json").read_text())["verdict"] == "rejected"


def test_threads_env_validation(tmp_path, monkeypatch):
    monkeypatch.setenv("LIESTAB_THREADS", "zero")
    assert run(["check", "--builtin", "example-4.1", "--out", str(tmp_path)]) == 2
    monkeypatch.setenv("LIESTAB_THREADS", "0")
    assert run(["check", "--builtin", "example-4.1", "--out", str(tmp_path)]) == 2
    monkeypatch.setenv("LIESTAB_THREADS", "2")
    assert run(["simulate", "--builtin", "heisenberg-deadbeat",
                "--out", str(tmp_path)]) == 0


def test_scenario_file_roundtrip(tmp_path):
    scn = {
        "name": "custom",
        "algebra": {"dim": 3, "labels": ["a", "b", "c"],
                    "brackets": [{"i": "a", "j": "b", "coeffs": {"c": 1.0}}]},
        "n": 1, "r": 1,
        "A": (0.5 * np.eye(3)).tolist(),
        "terms": [{"letters": ["X1", "W1"], "coeff": [0.25]}],
        "ideal": "full",
        "signal": {"kind": "samples", "samples": [[0.1, 0.0, 0.0]], "ideal": True},
        "x0": [1.0, 1.0, 1.0],
        "horizon": 30,
    }
    path = tmp_path / "scn.json"
    path.write_text(json.dumps(scn))
    sc = load_scenario(path)
    assert sc.system.algebra.dim == 3
    assert sc.horizon == 30
    out = tmp_path / "out"
    assert run(["simulate", "--scenario", str(path), "--out", str(out)]) == 0
    assert run(["check", "--scenario", str(path), "--out", str(out)]) == 0


def test_scenario_validation_errors():
    base = {"algebra": "heisenberg", "n": 1, "r": 1,
            "A": np.eye(3).tolist(), "x0": [0.0] * 3}
    for breakage, msg in [
        ({"algebra": "nope"}, "catalog"),
        ({"A": np.eye(2).tolist()}, "A"),
        ({"terms": [{"letters": ["X9", "W1"], "coeff": [1.0]}]}, "terms"),
        ({"signal": {"kind": "mystery"}}, "signal"),
        ({"x0": [1.0]}, "x0"),
        ({"horizon": -2}, "horizon"),
        ({"ideal": {"labels": ["zz"]}}, "ideal"),
    ]:
        data = dict(base) | breakage
        with pytest.raises(ScenarioError):
            scenario_from_dict(data)


def test_builtin_unknown():
    with pytest.raises(SystemExit):
        main(["check", "--builtin", "mystery"])
