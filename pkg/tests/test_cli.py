import json
import subprocess
import sys

import pytest

from cltk import cli


def run(capsys, *argv):
    status = cli.main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def doc(capsys, *argv):
    status, out, _ = run(capsys, *argv)
    assert status == 0
    d = json.loads(out)
    assert {"tool_version", "config_echo", "error_estimates"} <= d.keys()
    return d


def test_coeffs_csv(capsys):
    status, out, _ = run(capsys, "coeffs", "--form", "delta", "--max-n", "10", "--format", "csv")
    lines = out.strip().splitlines()
    assert status == 0 and lines[0] == "n,lambda" and len(lines) == 11
    assert lines[2].startswith("2,-0.53033")


def test_coeffs_json_and_file_form(capsys, tmp_path):
    target = tmp_path / "delta.csv"
    status, _, _ = run(capsys, "coeffs", "--max-n", "400", "--format", "csv", "--out", str(target))
    assert status == 0
    d = doc(capsys, "coeffs", "--form", f"file:{target}", "--max-n", "5")
    assert d["n"] == [1, 2, 3, 4, 5] and d["lambda"][0] == 1.0


def test_determinism_modulo_timestamp(capsys):
    a = doc(capsys, "optimize", "--nu", "1/4", "--degree", "1", "--starts", "2", "--seed", "3")
    b = doc(capsys, "optimize", "--nu", "1/4", "--degree", "1", "--starts", "2", "--seed", "3")
    a.pop("timestamp"), b.pop("timestamp")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["nu"] == "1/4" and a["config_echo"]["seed"] == 3


def test_lvalue(capsys):
    d = doc(capsys, "lvalue", "--re", "0.5", "--im", "10")
    assert abs(d["abs"] - 0.8434341651519526) < 1e-9
    assert d["error_estimates"]["functional_equation_defect"] < 1e-8


def test_moment_windowed(capsys, tmp_path):
    csv = tmp_path / "m.csv"
    d = doc(capsys, "moment", "--T", "60", "--step", "0.1", "--csv", str(csv))
    assert {"T", "nu", "alpha", "beta", "numeric", "mainterm", "ratio", "step", "error_estimate"} <= d.keys()
    assert d["nu"] is None and 0.9 < d["ratio"] < 1.1
    assert csv.read_text().startswith("t,w,abs_L_sq\n")


def test_shifted_and_verify(capsys):
    d = doc(capsys, "shifted", "--l1", "1", "--l2", "2", "--h", "1", "--max", "1000")
    assert d["l1"] == 1 and abs(d["sum"]) < 1000
    d = doc(capsys, "verify", "--suite", "hecke")
    assert d["passed"] is True


@pytest.mark.parametrize(
    "argv",
    [
        ["coeffs"],
        ["coeffs", "--max-n", "10", "--form", "nonsense"],
        ["optimize", "--nu", "abc", "--degree", "1", "--starts", "1"],
        ["moment", "--T", "10"],
        ["coeffs", "--max-n", "10", "--threads", "0"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    status, _, err = run(capsys, *argv)
    assert status == 2 and err


def test_computation_error_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("n,lambda\n1,1.0\n3,0.5\n")
    status, _, err = run(capsys, "coeffs", "--form", f"file:{bad}", "--max-n", "2")
    assert status == 1 and err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cltk", "coeffs", "--max-n", "3", "--format", "csv"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.count("\n") == 4
