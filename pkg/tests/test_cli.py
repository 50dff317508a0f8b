import pytest

from filmcascade.cli import main


def write(tmp_path, text):
    p = tmp_path / "exp.ini"
    p.write_text(text, encoding="utf-8")
    return str(p)


FAST = """
[params]
delta = 0.2, 0.1, 0.05, 0.025
[resolution]
nx = 16
ny = 12
dt = 0.01
[run]
t_end = 0.1
cadence = 0.05
"""


def test_compare_same_model_exit_zero(tmp_path, capsys):
    cfg = write(tmp_path, FAST + "[models]\nmodel_a = kawahara\nmodel_b = kawahara\n")
    assert main(["compare", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert "PASS  slope" in capsys.readouterr().out
    assert (tmp_path / "o" / "kawahara_vs_kawahara.csv").exists()


def test_gate_failure_exit_one(tmp_path, capsys):
    cfg = write(tmp_path, FAST + "[models]\nmodel_a = kawahara\nmodel_b = burgers\n"
                "[gates]\nslope_min = 10\nslope_max = 11\n")
    assert main(["compare", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "FAIL  slope" in capsys.readouterr().out


def test_bad_config_exit_two(tmp_path, capsys):
    cfg = write(tmp_path, "[params]\nunknown = 1\n")
    assert main(["compare", "--config", cfg]) == 2
    assert "unknown key" in capsys.readouterr().err
    assert main(["compare", "--config", str(tmp_path / "missing.ini")]) == 2


def test_simulate_and_stability(tmp_path):
    cfg = write(tmp_path, FAST)
    assert main(["simulate", "--config", cfg, "--model", "benney", "--out", str(tmp_path / "s")]) == 0
    assert len(list((tmp_path / "s" / "snapshots").glob("*.tflm"))) == 3
    assert main(["stability", "--alpha", "0.7", "--k-range", "0.5:3:4", "--out", str(tmp_path / "st")]) == 0
    assert (tmp_path / "st" / "neutral_curve.svg").exists()


def test_simulate_ns_then_energy_audit(tmp_path):
    cfg = write(tmp_path, FAST + "[output]\nformats = csv\n")
    out = str(tmp_path / "ns")
    assert main(["simulate-ns", "--config", cfg, "--out", out]) == 0
    assert main(["energy-audit", "--traj", out + "/snapshots", "--out", out, "--m", "1"]) == 0


def test_energy_audit_without_snapshots(tmp_path):
    assert main(["energy-audit", "--traj", str(tmp_path), "--out", str(tmp_path)]) == 2


def test_usage_error():
    with pytest.raises(SystemExit):
        main(["fly"])
