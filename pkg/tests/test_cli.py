import json

import numpy as np
import pytest

from quartic_synapse.cli_runner import main

from test_config import minimal_doc


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_folds_preset(tmp_path):
    out = tmp_path / "out"
    assert main(["folds", "--preset", "fig9", "--out", str(out)]) == 0
    rows = (out / "folds.csv").read_text().splitlines()
    assert rows[0] == "kind,p2,p1"
    p2s = sorted(float(r.split(",")[1]) for r in rows[1:]
                 if not r.startswith("transcritical"))
    assert p2s == pytest.approx([0.24875, 0.976512, 1.524738], abs=5e-4)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_sha256"]
    assert "numpy" in manifest["versions"]
    assert "tolerances" in manifest


def test_simulate_rest_with_zero_stimulus(tmp_path):
    doc = minimal_doc()
    doc["simulate"] = {"t_end": 200.0, "initial": [2.3, 0.0]}
    doc["model"]["b"] = -2.3
    doc["simulate"]["initial"] = [-doc["model"]["b"] / doc["model"]["a"], 0.0]
    path = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["simulate", "--config", path, "--out", str(out)]) == 0
    data = np.loadtxt(out / "trajectory.csv", delimiter=",", skiprows=1)
    rest = [-doc["model"]["b"] / doc["model"]["a"], 0.0]
    assert np.max(np.abs(data[:, 1:] - rest)) < 1e-9


def test_missing_config_is_exit_2(tmp_path):
    out = tmp_path / "out"
    rc = main(["simulate", "--config", str(tmp_path / "nope.json"),
               "--out", str(out)])
    assert rc == 2
    record = json.loads((out / "error.json").read_text())
    assert record["error_type"] == "ConfigError"


def test_no_config_no_preset_is_exit_2(tmp_path):
    assert main(["folds", "--out", str(tmp_path / "out")]) == 2


def test_numerical_failure_is_exit_3(tmp_path):
    doc = minimal_doc()
    # negative margin puts entries outside the admissible interval
    doc["entry_exit"] = {"n_entries": 3, "margin": -0.5}
    path = write_config(tmp_path, doc)
    out = tmp_path / "out"
    rc = main(["entry-exit", "--config", path, "--out", str(out)])
    assert rc == 3
    record = json.loads((out / "error.json").read_text())
    assert record["is_model_error"]


def test_equilibria_command(tmp_path):
    out = tmp_path / "out"
    assert main(["equilibria", "--preset", "fig3", "--out", str(out)]) == 0
    rows = (out / "equilibria.csv").read_text().splitlines()
    labels = [r.split(",")[0] for r in rows[1:]]
    assert labels == ["S", "U", "U_tilde"]


def test_continue_eq_markers(tmp_path):
    out = tmp_path / "out"
    assert main(["continue-eq", "--preset", "fig7", "--out", str(out)]) == 0
    rows = (out / "markers.csv").read_text().splitlines()[1:]
    hopf_alphas = sorted(float(r.split(",")[2]) for r in rows
                         if r.startswith("hopf"))
    assert hopf_alphas == pytest.approx([0.2565, 1.00595, 1.8376], abs=5e-4)


def test_outputs_bit_identical(tmp_path):
    doc = minimal_doc()
    doc["simulate"] = {"t_end": 400.0}
    path = write_config(tmp_path, doc)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["simulate", "--config", path, "--out", str(out)]) == 0
        outs.append(out)
    for artifact in ("trajectory.csv", "events.csv", "classification.json",
                     "phase_plane.svg", "time_series.svg", "manifest.json"):
        b1 = (outs[0] / artifact).read_bytes()
        b2 = (outs[1] / artifact).read_bytes()
        assert b1 == b2, f"{artifact} differs between identical runs"


def test_entry_exit_table(tmp_path):
    doc = minimal_doc()
    doc["entry_exit"] = {"n_entries": 5}
    path = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["entry-exit", "--config", path, "--out", str(out)]) == 0
    data = np.loadtxt(out / "entry_exit.csv", delimiter=",", skiprows=1)
    # closed form and quadrature agree; exits decrease with entry point
    assert np.all(data[:, 3] <= 1e-8 * np.maximum(1.0, np.abs(data[:, 1])))
    assert np.all(np.diff(data[:, 1]) < 0)


def test_tol_flag_recorded(tmp_path):
    doc = minimal_doc()
    doc["simulate"] = {"t_end": 50.0}
    path = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["simulate", "--config", path, "--out", str(out),
                 "--tol", "1e-8"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["tolerances"]["simulate_tol"] == 1e-8
