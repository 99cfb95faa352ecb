import json
import subprocess
import sys

import pytest

from schwinger.cli import cli_dispatch
from schwinger.hamiltonian import LatticeParams, build_parity_hamiltonian


def run(capsys, *argv):
    code = cli_dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analytic(capsys):
    code, out, _ = run(capsys, "analytic", "--m", "1.4", "--eE", "20")
    assert code == 0
    assert json.loads(out)["gamma_1p1"] == pytest.approx(4.227, abs=1e-3)


def test_analytic_3p1_both_conventions(capsys):
    _, out, _ = run(capsys, "analytic", "--m", "1.0", "--eE", "20", "--pperp-max", "1.7320508075688772",
                    "--convention", "paper")
    paper = json.loads(out)["gamma_3p1"]
    _, out, _ = run(capsys, "analytic", "--m", "1.0", "--eE", "20", "--pperp-max", "1.7320508075688772")
    literal = json.loads(out)["gamma_3p1"]
    assert paper == pytest.approx(0.576, abs=0.01)
    assert literal / paper == pytest.approx(3.141592653589793)


@pytest.mark.parametrize("argv", [
    ("analytic", "--m", "1", "--eE", "20", "--bogus"),
    ("frobnicate",),
    ("curve", "--mprime", "1.4", "--mode", "psychic"),
    ("fit", "--mprime", "1.4", "--window", "0.4:0.1"),
    ("analytic", "--m", "0", "--eE", "20"),
    ("hamiltonian", "--config", "/nonexistent.toml"),
])
def test_invalid_input_exits_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert err
    assert out == ""


def test_hamiltonian_dump(capsys, tmp_path):
    code, out, _ = run(capsys, "hamiltonian", "--out", str(tmp_path))
    assert code == 0
    assert out == build_parity_hamiltonian("even", LatticeParams()).dump()
    assert (tmp_path / "hamiltonian_even_1.0.txt").read_text() == out
    assert json.loads((tmp_path / "config.json").read_text())["seed"] == 1


def test_curve_then_fit(capsys, tmp_path):
    code, csv_text, _ = run(capsys, "curve", "--mprime", "1.4", "--mode", "exact", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "curves" / "exact_1.4.csv").read_text() == csv_text
    code, out, _ = run(capsys, "fit", "--mprime", "1.4", "--mode", "exact", "--out", str(tmp_path),
                       "--window", "0.15:0.40")
    assert code == 0
    fit = json.loads(out)
    assert fit["window"] == [0.15, 0.40]
    assert fit["n_points"] == 4
    assert fit["gamma"] > 0


def test_fit_failure_exits_2(capsys, tmp_path):
    run(capsys, "curve", "--mprime", "1.4", "--out", str(tmp_path))
    code, _, err = run(capsys, "fit", "--mprime", "1.4", "--out", str(tmp_path), "--window", "0.40:0.45")
    assert code == 2
    assert "numerical failure" in err


def test_fit_missing_curve_exits_1(capsys, tmp_path):
    code, _, err = run(capsys, "fit", "--mprime", "1.4", "--out", str(tmp_path))
    assert code == 1
    assert "not found" in err


def test_rates_from_stored_curves(capsys, tmp_path):
    for m in ("1.0", "1.2", "1.4", "1.6", "1.8", "2.0"):
        assert run(capsys, "curve", "--mprime", m, "--out", str(tmp_path))[0] == 0
    code, out, _ = run(capsys, "rates", "--mode", "exact", "--out", str(tmp_path), "--convention", "literal")
    assert code == 0
    data = json.loads(out)
    assert data["selected"] == data["gamma_3p1"]["literal"]
    assert data["gamma_3p1"]["literal"]["value"] == pytest.approx(
        3.141592653589793 * data["gamma_3p1"]["paper"]["value"])


def test_config_file_and_seed_override(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("n_shot = 64\nmass_grid = [1.4]\n[fit_windows]\n\"1.4\" = [0.15, 0.40]\n")
    code, out, _ = run(capsys, "curve", "--config", str(cfg), "--seed", "5", "--mprime", "1.4",
                       "--mode", "noiseless", "--out", str(tmp_path / "o"))
    assert code == 0
    echoed = json.loads((tmp_path / "o" / "config.json").read_text())
    assert echoed["seed"] == 5 and echoed["n_shot"] == 64
    again = run(capsys, "curve", "--config", str(cfg), "--seed", "5", "--mprime", "1.4", "--mode", "noiseless")[1]
    assert again == out


def test_unknown_config_key_exits_1(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("shots = 64\n")
    code, _, err = run(capsys, "curve", "--config", str(cfg), "--mprime", "1.4")
    assert code == 1
    assert "shots" in err


def test_vqe_command(capsys, tmp_path):
    code, out, _ = run(capsys, "vqe", "--mprime", "1.4", "--out", str(tmp_path))
    assert code == 0
    rec = json.loads(out)
    assert rec["fidelity"] >= 0.99
    assert json.loads((tmp_path / "vqe_1.4.json").read_text()) == rec


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "schwinger", "analytic", "--m", "1.4", "--eE", "20"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["gamma_1p1"] == pytest.approx(4.227313, rel=1e-6)
