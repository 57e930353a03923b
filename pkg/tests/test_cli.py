"""Command line surface: runs, artifacts, determinism, exit codes."""

import filecmp
import json
import os

import numpy as np
import pytest

from scaffoldsim.cli import main

SMALL_PDE = """\
[run]
model = pde
t_end = 1
seed = 7

[pde]
dx = 250
snapshot_times = 0, 1
snapshot_fields = c1, chi
"""

SMALL_ODE = """\
[run]
model = ode
t_end = 12

[renewal]
period = 6
"""


def write(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_run_ode_writes_artifacts(tmp_path, capsys):
    cfg = write(tmp_path, SMALL_ODE)
    out = str(tmp_path / "out")
    assert main(["run", cfg, "--out", out]) == 0
    printed = capsys.readouterr().out
    assert "model: ode" in printed and "final state" in printed
    lines = (tmp_path / "out" / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,c1,c2,chi,h,tau"
    assert lines[1].startswith("0.0,")
    assert lines[-1].startswith("12.0,")
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["model"] == "ode"
    assert manifest["stats"]["renewal_events"] == [6.0]
    assert (tmp_path / "out" / "config_echo.txt").exists()


def test_run_pde_writes_artifacts(tmp_path):
    cfg = write(tmp_path, SMALL_PDE)
    out = str(tmp_path / "out")
    assert main(["run", cfg, "--out", out]) == 0
    files = sorted(os.listdir(out))
    assert "probe.csv" in files and "manifest.json" in files
    assert "snapshot_c1_t0.csv" in files and "snapshot_chi_t1.csv" in files
    header = (tmp_path / "out" / "snapshot_c1_t0.csv").read_text().splitlines()[0]
    assert header == "x_index,y_index,x_um,y_um,value"
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["grid"]["n_cells"] > 0
    assert manifest["probe"]["x"] == 2500.0


def test_identical_config_and_seed_byte_identical_outputs(tmp_path):
    cfg = write(tmp_path, SMALL_PDE)
    out1, out2 = str(tmp_path / "r1"), str(tmp_path / "r2")
    assert main(["run", cfg, "--out", out1]) == 0
    assert main(["run", cfg, "--out", out2]) == 0
    for name in os.listdir(out1):
        assert filecmp.cmp(os.path.join(out1, name), os.path.join(out2, name),
                           shallow=False), name


def test_validate_exit_codes(tmp_path, capsys):
    good = write(tmp_path, "[run]\nmodel = ode\n", "good.ini")
    assert main(["validate", good]) == 0
    bad = write(tmp_path, "[run]\nmodel = ode\nnope = 1\n", "bad.ini")
    assert main(["validate", bad]) == 2
    assert "nope" in capsys.readouterr().err
    assert main(["validate", str(tmp_path / "missing.ini")]) == 2


def test_preset_smoke(tmp_path):
    out = str(tmp_path / "fig2")
    assert main(["preset", "fig2", "--out", out]) == 0
    rows = (tmp_path / "fig2" / "trajectory.csv").read_text().splitlines()
    assert rows[-1].startswith("144.0,")


def test_tensor_command(tmp_path, capsys):
    a = tmp_path / "A.txt"
    np.savetxt(a, np.diag([1.0, 2.0, 4.0]))
    assert main(["tensor", str(a)]) == 0
    out = capsys.readouterr().out
    assert "D1 [um^2/h]" in out and "planar restriction" in out
    bad = tmp_path / "bad.txt"
    np.savetxt(bad, np.diag([1.0, 1.0, -1.0]))
    assert main(["tensor", str(bad)]) == 1


def test_rates_command(tmp_path):
    out = tmp_path / "rates.csv"
    assert main(["rates", str(out), "--points", "50"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "S,alpha1_S,alpha2_S,chi,alpha1_chi,alpha2_chi"
    assert len(lines) == 51
    arr = np.loadtxt(str(out), delimiter=",", skiprows=1)
    assert arr[:, 1].min() >= 0.025 and arr[:, 1].max() <= 0.05
