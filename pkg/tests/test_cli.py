"""Command-line interface: parameter files, outputs, exit codes."""

import os

import numpy as np
import pytest

from sisctrl.cli import main, read_params
from sisctrl.errors import ConfigError

PARAMS_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "params")
ONE = os.path.join(PARAMS_DIR, "one_switch.txt")
TWO = os.path.join(PARAMS_DIR, "two_switch.txt")


def test_read_params_roundtrip():
    raw = read_params(TWO)
    assert raw.beta == 0.5 and raw.unit_control_cost == 2.0


def test_read_params_unknown_key(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("beta = 0.5\nbogus = 1\n")
    with pytest.raises(ConfigError):
        read_params(str(p))


def test_read_params_duplicate_key(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("beta = 0.5\nbeta = 0.6\n")
    with pytest.raises(ConfigError):
        read_params(str(p))


def test_read_params_not_a_number(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("beta = zebra\n")
    with pytest.raises(ConfigError):
        read_params(str(p))


def test_derive_command(capsys):
    assert main(["derive", "--params", TWO]) == 0
    out = capsys.readouterr().out
    assert "x_bar_C = 0.8" in out
    assert "TwoSwitchSynthesis" in out


def test_missing_params_is_config_error(capsys):
    assert main(["derive"]) == 1


def test_bad_params_path_is_config_error(capsys):
    assert main(["derive", "--params", "/nonexistent/file.txt"]) == 1


def test_plan_command(tmp_path, capsys):
    rc = main(["plan", "--params", ONE, "--x0", "0.05", "--t0", "0",
               "--out", str(tmp_path), "--step", "0.01"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "switch 1" in out and "total cost" in out
    assert (tmp_path / "trajectory.csv").exists()
    assert (tmp_path / "trajectory.png").exists()
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,x,w,running_cost"


def test_plan_terminal_time(tmp_path, capsys):
    rc = main(["plan", "--params", ONE, "--x0", "0.4", "--t0", "50",
               "--out", str(tmp_path)])
    assert rc == 0
    assert "total cost = 0" in capsys.readouterr().out


def test_curves_command(tmp_path, capsys):
    rc = main(["curves", "--params", TWO, "--nx", "40", "--nt", "40",
               "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "curves.csv").exists()
    assert (tmp_path / "regions.csv").exists()
    assert (tmp_path / "diagram.png").exists()
    names = {line.split(",")[0]
             for line in (tmp_path / "curves.csv").read_text().splitlines()[1:]}
    assert names == {"S", "sigma", "Gamma"}


def test_value_command(tmp_path):
    rc = main(["value", "--params", ONE, "--nx", "8", "--nt", "8",
               "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "value.csv").read_text().splitlines()
    assert lines[0] == "x,t,W,residual,label"
    assert len(lines) == 65
    assert (tmp_path / "value.png").exists()


def test_extremals_command(tmp_path):
    rc = main(["extremals", "--params", TWO, "--nx", "5", "--step", "0.01",
               "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "extremals.csv").read_text().splitlines()
    assert lines[0] == "x_T,t,x,lambda,w"
    assert (tmp_path / "extremals.png").exists()


def test_simulate_command(tmp_path, capsys):
    rc = main(["simulate", "--params", ONE, "--x0", "0.1",
               "--breakpoints", "0,20,50", "--levels", "0.03,0",
               "--step", "0.01", "--out", str(tmp_path)])
    assert rc == 0
    assert "total cost" in capsys.readouterr().out
    assert (tmp_path / "trajectory.csv").exists()


def test_simulate_bad_schedule(tmp_path, capsys):
    rc = main(["simulate", "--params", ONE, "--x0", "0.1",
               "--breakpoints", "0,60", "--levels", "0",
               "--out", str(tmp_path)])
    assert rc == 1


def test_determinism(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for d in (a, b):
        assert main(["curves", "--params", ONE, "--nx", "25", "--nt", "25",
                     "--out", str(d)]) == 0
    assert (a / "curves.csv").read_bytes() == (b / "curves.csv").read_bytes()
    assert (a / "regions.csv").read_bytes() == (b / "regions.csv").read_bytes()


def test_env_override(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SISCTRL_PARAMS", TWO)
    assert main(["derive"]) == 0
    assert "TwoSwitchSynthesis" in capsys.readouterr().out
