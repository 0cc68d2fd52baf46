import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from fourphoton import bell
from fourphoton.cli import main, parse_phase
from fourphoton.errors import ConfigurationError
from fourphoton.fock import PostselectedState, four_photon_state
from fourphoton.lhv import PAPER_L1, PAPER_SETTINGS


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("text, value", [
    ("0", 0.0), ("0.25", 0.25), ("pi/4", math.pi / 4), ("-pi/4", -math.pi / 4),
    ("−pi/4", -math.pi / 4), ("3*pi/4", 3 * math.pi / 4), ("2pi", 2 * math.pi), ("-0.5", -0.5),
])
def test_parse_phase(text, value):
    assert parse_phase(text) == pytest.approx(value)


@pytest.mark.parametrize("text", ["pie", "__import__('os')", "1/0", "pi**2", ""])
def test_parse_phase_rejects(text):
    with pytest.raises(Exception):
        parse_phase(text)


def test_state_final(capsys):
    code, out, _ = run(capsys, "state", "--stage", "final")
    assert code == 0
    assert "VVVV  0.57735026919  0" in out


def test_state_json_is_a_state_dump(capsys):
    _, out, _ = run(capsys, "state", "--format", "json")
    data = json.loads(out)
    assert len(data) == 16
    assert PostselectedState.from_json(data).allclose(four_photon_state(), tol=1e-11)


def test_state_pairterm(capsys):
    _, out, _ = run(capsys, "state", "--stage", "pairterm", "--format", "json")
    data = json.loads(out)
    assert sorted(v[0] for v in data.values()) == [1, 1, 2]


def test_state_postselected(capsys):
    _, out, _ = run(capsys, "state", "--stage", "postselected", "--format", "json")
    data = json.loads(out)
    assert len(data) == 6
    assert sorted(v[0] for v in data.values()) == [0.5] * 4 + [1, 1]


@pytest.mark.parametrize("args, expected", [
    (("0", "0", "0", "0"), 1.0),
    (("3.14159265", "0", "0", "0"), -1.0),
    (("0", "0", "0", "0", "--visibility", "0.5"), 0.5),
    (("pi/2", "0", "0", "0"), 0.0),
])
def test_correlate(capsys, args, expected):
    code, out, _ = run(capsys, "correlate", *args)
    assert code == 0
    assert float(out) == pytest.approx(expected, abs=1e-11)


def test_correlate_scan_csv(capsys):
    _, out, _ = run(capsys, "correlate", "0", "0", "0", "0", "--scan", "a", "--points", "8")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["phi_a", "phi_a'", "phi_b", "phi_b'", "E"]
    assert len(rows) == 9
    assert float(rows[5][4]) == pytest.approx(-1.0)


def test_scan_default_resolution(capsys):
    _, out, _ = run(capsys, "scan", "b'", "--base", "0", "-pi/4", "0", "0")
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 257
    assert float(rows[1][1]) == pytest.approx(-math.pi / 4)


def test_probs(capsys):
    _, out, _ = run(capsys, "probs", "0", "0", "0", "0", "--format", "json")
    data = json.loads(out)
    ps = {tuple(d["outcome"]): d["p"] for d in data["probabilities"]}
    assert sum(ps.values()) == pytest.approx(1.0)
    assert ps[(1, 1, 1, 1)] == pytest.approx(1 / 3)


def test_tensor_paper_settings(capsys):
    code, out, _ = run(capsys, "tensor", "--paper-settings")
    assert code == 0
    assert "l1 = 1.88561808316" in out
    assert "critical visibility = 0.53033008589" in out
    assert "verdict: NO-LHV" in out


def test_tensor_visibility_053(capsys):
    _, out, _ = run(capsys, "tensor", "--paper-settings", "--visibility", "0.53")
    assert "verdict: LHV-OK" in out


def test_tensor_equal_settings_boundary(capsys):
    _, out, _ = run(capsys, "tensor", "--settings", *["0"] * 8)
    assert "l1 = 1\n" in out
    assert "verdict: LHV-OK" in out


def test_tensor_json_fields(capsys):
    _, out, _ = run(capsys, "tensor", "--paper-settings", "--format", "json")
    data = json.loads(out)
    assert set(data) >= {"settings", "tensor", "coefficients", "l1", "critical_visibility"}
    assert np.asarray(data["tensor"]).shape == (2, 2, 2, 2)
    assert data["l1"] == pytest.approx(PAPER_L1, abs=1e-10)


def test_tensor_requires_settings(capsys):
    code, _, err = run(capsys, "tensor")
    assert code != 0
    assert "--paper-settings" in err


def test_bell_saturating(capsys):
    _, out, _ = run(capsys, "bell", "--saturating", "--paper-settings", "--format", "json")
    data = json.loads(out)
    assert data["lhv_bound"] == pytest.approx(1.0)
    assert data["ratio"] == pytest.approx(8 / (3 * math.sqrt(2)), abs=1e-10)


def test_bell_zero_expression(capsys, tmp_path):
    f = tmp_path / "zero.json"
    f.write_text(json.dumps(np.zeros((2, 2, 2, 2)).tolist()))
    _, out, _ = run(capsys, "bell", str(f), "--paper-settings", "--format", "json")
    data = json.loads(out)
    assert data["lhv_bound"] == 0 and data["quantum_value"] == 0


def test_tensor_json_roundtrips_through_bell(capsys, tmp_path):
    tfile = tmp_path / "t.json"
    assert main(["tensor", "--paper-settings", "--format", "json", "--output", str(tfile)]) == 0
    _, out, _ = run(capsys, "bell", "--tensor-file", str(tfile), "--saturating", "--format", "json")
    data = json.loads(out)
    report = json.loads(tfile.read_text())
    assert data["quantum_value"] == pytest.approx(report["l1"], abs=1e-10)
    # the emitted saturating weights are themselves a valid expression file
    wfile = tmp_path / "w.json"
    wfile.write_text(json.dumps({"weights": data["weights"]}))
    _, out2, _ = run(capsys, "bell", str(wfile), "--paper-settings", "--format", "json")
    assert json.loads(out2)["quantum_value"] == pytest.approx(report["l1"], abs=1e-10)


def test_bell_malformed_json_reports_line(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("[\n  [1, 2,\n  oops]\n]")
    code, _, err = run(capsys, "bell", str(f), "--paper-settings")
    assert code != 0
    assert "bad.json:3:" in err
    assert "oops" in err


def test_bell_wrong_shape(capsys, tmp_path):
    f = tmp_path / "w.json"
    f.write_text("[1, 2, 3]")
    code, _, err = run(capsys, "bell", str(f), "--paper-settings")
    assert code != 0


def test_optimize_deterministic(capsys):
    args = ("optimize", "--seed", "7", "--restarts", "1", "--format", "json")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    data = json.loads(first)
    assert data["l1"] >= PAPER_L1 - 1e-6
    assert {"settings", "l1", "critical_visibility", "iterations"} <= set(data)


def test_state_file_input(capsys, tmp_path):
    f = tmp_path / "hhhh.json"
    f.write_text(json.dumps({"HHHH": [1.0, 0.0]}))
    _, out, _ = run(capsys, "tensor", "--paper-settings", "--state", str(f), "--format", "json")
    assert json.loads(out)["l1"] <= 1.0


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["correlate", "0", "0", "0", "0", "--bogus"])
    assert exc.value.code != 0


def test_bad_visibility_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["correlate", "0", "0", "0", "0", "--visibility", "1.5"])
    assert exc.value.code != 0


def test_bad_phase_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["correlate", "0", "x", "0", "0"])
    assert exc.value.code != 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fourphoton", "correlate", "0", "0", "0", "0"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.strip() == "1"


def test_nonfinite_objective_is_configuration_error(monkeypatch):
    monkeypatch.setattr(bell, "settings_l1", lambda state, sc: float("nan"))
    with pytest.raises(ConfigurationError):
        bell.optimize_settings(four_photon_state(), PAPER_SETTINGS, bell.OptimizerConfig(refine=False))
