"""End-to-end tests for the hyperswitch command line."""

import csv
import json

import pytest

from hyperswitch.certifier.schemas import Certificate, Variant
from hyperswitch.certifier.store import save_certificate
from hyperswitch.cli.main import EXIT_ERROR, EXIT_INFEASIBLE, EXIT_OK, INFEASIBLE_FILE, main
from hyperswitch.cli.scenarios import bundled_scenarios, load_scenario
from hyperswitch.exceptions import ConfigurationError
from hyperswitch.signals import dump_signal, periodic_signal

DAMPED_SYSTEM = {
    "name": "wave split, damped",
    "n": 2,
    "modes": [
        {"Lambda": [-1.0, 1.0], "m": 1, "F": [[-0.3, 0.0], [0.0, -0.3]], "G": [[0.0, -1.2], [0.6, 0.0]]},
        {"Lambda": [-1.0, 1.0], "m": 1, "F": [[-0.3, 0.0], [0.0, -0.3]], "G": [[0.0, -0.6], [1.2, 0.0]]},
    ],
}


def _small_scenario(tmp_path, **extra):
    doc = {
        "name": "small",
        "system": DAMPED_SYSTEM,
        "signal": {"kind": "periodic", "period": 1.0, "horizon": 8.0},
        "grid": {"n_x": 41},
        "initial": {"amplitude": [1.0, 1.0]},
        "sweep": {"start": 0.5, "stop": 1.5, "steps": 3},
    }
    doc.update(extra)
    path = tmp_path / "small.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def _values(text):
    return dict(line.split(" = ", 1) for line in text.splitlines() if " = " in line)


def test_bundled_scenarios_parse():
    """Test that every bundled scenario loads, builds its system and its signal."""
    names = bundled_scenarios()
    assert "example_a_undamped" in names
    for name in names:
        config = load_scenario(name)
        system = config.load_system()
        signal = config.build_signal(len(system))
        assert config.name == name
        assert signal.horizon > 0.0


def test_unknown_scenario():
    with pytest.raises(ConfigurationError):
        load_scenario("no_such_scenario")


def test_dwell_bound_from_warm_start(tmp_path, capsys):
    """Test that the bundled weights reproduce tau_D = ln 2 / 0.3."""
    code = main(["dwell-bound", "--config", "example_a_undamped", "--out", str(tmp_path)])
    out = _values(capsys.readouterr().out)
    assert code == EXIT_OK
    assert out["variant"] == "DwellSignFixed"
    assert out["gamma"] == "2"
    assert out["tau_D"] == "2.31049"
    assert (tmp_path / "certificate.json").exists()
    assert json.loads((tmp_path / "audit.json").read_text())["passed"]


def test_dwell_bound_rejects_common_variant(tmp_path, capsys):
    code = main(["dwell-bound", "--config", "example_a_undamped", "--variant", "CommonSignFixed", "--out", str(tmp_path)])
    assert code == EXIT_ERROR
    assert "ConfigurationError" in capsys.readouterr().err


@pytest.mark.slow
def test_certify_damped(tmp_path, capsys):
    code = main(["certify", "--config", "example_a_damped", "--out", str(tmp_path)])
    out = _values(capsys.readouterr().out)
    assert code == EXIT_OK
    assert float(out["nu"]) >= 0.1
    assert (tmp_path / "audit.md").exists()


@pytest.mark.slow
def test_certify_undamped_is_infeasible(tmp_path, capsys):
    code = main(["certify", "--config", "example_a_undamped", "--out", str(tmp_path)])
    assert code == EXIT_INFEASIBLE
    assert capsys.readouterr().out.startswith("infeasible")
    doc = json.loads((tmp_path / INFEASIBLE_FILE).read_text())
    assert doc["variant"] == "CommonSignFixed"
    assert doc["error"] == "Infeasible"


def test_malformed_config(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["certify", "--config", str(path)]) == EXIT_ERROR
    assert capsys.readouterr().err.startswith("error:")


def test_invalid_scenario_document(tmp_path):
    path = _small_scenario(tmp_path, system_file="elsewhere.json")
    assert main(["simulate", "--config", str(path)]) == EXIT_ERROR


def test_missing_config():
    assert main(["certify"]) == EXIT_ERROR


def test_jobs_must_be_positive(tmp_path):
    assert main(["sweep", "--config", str(_small_scenario(tmp_path)), "--jobs", "0"]) == EXIT_ERROR


def test_simulate_writes_trace(tmp_path, capsys):
    out_dir = tmp_path / "run"
    code = main(["simulate", "--config", str(_small_scenario(tmp_path)), "--out", str(out_dir), "--states", "20"])
    out = _values(capsys.readouterr().out)
    assert code == EXIT_OK
    assert out["rate"].endswith("(decay)")
    assert (out_dir / "trace.csv").exists()
    assert (out_dir / "states.csv").exists()
    assert not (out_dir / "trace.svg").exists()


def test_simulate_with_certificate(tmp_path):
    cert = Certificate(variant=Variant.COMMON_SIGN_FIXED, Q=[[1.5, 1.0], [1.5, 1.0]], mu=[-0.2, -0.2], nu=0.1)
    cert_path = save_certificate(cert, tmp_path / "cert.json")
    out_dir = tmp_path / "run"
    argv = ["simulate", "--config", str(_small_scenario(tmp_path)), "--out", str(out_dir), "--certificate", str(cert_path)]
    assert main(argv) == EXIT_OK
    with (out_dir / "trace.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert all(row["V"] != "" for row in rows)


def test_sweep(tmp_path, capsys):
    out_dir = tmp_path / "sweep"
    code = main(["sweep", "--config", str(_small_scenario(tmp_path)), "--out", str(out_dir), "--jobs", "2"])
    out = _values(capsys.readouterr().out)
    assert code == EXIT_OK
    assert out["sign_change"] == "none"
    with (out_dir / "sweep.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["period"]) for r in rows] == [0.5, 1.0, 1.5]
    assert all(float(r["rate"]) > 0.0 for r in rows)


def test_sweep_rejects_zero_steps(tmp_path):
    assert main(["sweep", "--config", str(_small_scenario(tmp_path)), "--steps", "0"]) == EXIT_ERROR


def test_validate_signal(tmp_path, capsys):
    """Test membership of the periodic signals against tau_D = 2.3105, N0 = 1."""
    fast = ["validate-signal", "--config", "example_a_undamped", "--tau-d", "2.3105", "--n0", "1"]
    assert main(fast) == EXIT_INFEASIBLE
    assert capsys.readouterr().out.startswith("invalid")

    path = dump_signal(periodic_signal(2.4, horizon=12.0), tmp_path / "slow.json")
    assert main(["validate-signal", "--signal", str(path), "--tau-d", "2.3105"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("valid")


def test_validate_signal_needs_tau(tmp_path):
    path = dump_signal(periodic_signal(2.4), tmp_path / "signal.json")
    assert main(["validate-signal", "--signal", str(path)]) == EXIT_ERROR
