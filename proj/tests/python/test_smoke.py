"""Smoke tests for the python module and the command-line tool."""

import csv
import json
import math
import os
import subprocess
import sys

import pytest

MODULE_DIR = os.environ.get("PIEKIT_MODULE_DIR")
if MODULE_DIR:
    sys.path.insert(0, MODULE_DIR)

import _piekit as pk  # noqa: E402


def test_preset_dimensions():
    sys_rd = pk.preset_system("reaction-diffusion")
    assert (sys_rd.m, sys_rd.n, sys_rd.nw, sys_rd.nz, sys_rd.ny) == (0, 1, 1, 1, 1)
    beam = pk.preset_system("beam")
    assert (beam.m, beam.n) == (0, 2)
    with pytest.raises(Exception):
        pk.preset_system("no-such-system")


def test_system_json_roundtrip():
    sys_rd = pk.preset_system("reaction-diffusion")
    clone = pk.PIESystem.from_json(sys_rd.to_json())
    assert clone.to_json() == sys_rd.to_json()


def test_norm_bound_scalar_oracle():
    res = pk.h2_norm_bound(pk.preset_system("ode-test"))
    assert res["status"] == "optimal"
    assert res["gamma"] == pytest.approx(math.sqrt(0.5), rel=0.02)


def test_estimator_scalar_oracle():
    res = pk.synthesize_estimator(pk.preset_system("ode-estimation"))
    assert res["status"] == "optimal"
    assert res["gamma"] == pytest.approx(math.sqrt(2.0), rel=0.05)
    assert "L1" in res["gain"]


def test_simulation_decay():
    traj = pk.simulate(pk.preset_system("ode-test"), order=2, dt=0.002, t_final=1.0)
    assert traj["t"][-1] == pytest.approx(1.0)
    # x' = -x from x(0) = 1
    assert traj["z"][-1][0] == pytest.approx(math.exp(-1.0), abs=1e-6)


def test_observer_error_decays():
    res = pk.synthesize_estimator(pk.preset_system("ode-estimation"))
    traj = pk.simulate_observer(
        pk.preset_system("ode-estimation"), res["gain"], order=2, dt=0.002, t_final=3.0
    )
    start = abs(traj["e_z"][0][0])
    end = abs(traj["e_z"][-1][0])
    assert end < 0.1 * start


def test_emit_csv(tmp_path):
    path = tmp_path / "traj.csv"
    pk.emit_csv(
        pk.preset_system("reaction-diffusion"), "", str(path), order=4, dt=0.01,
        t_final=0.1,
    )
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "t"
    assert len(rows) == 12  # header + 11 steps
    assert all(len(r) == len(rows[0]) for r in rows)


def test_cli_norm(tmp_path):
    cli = os.environ.get("PIEKIT_CLI")
    if not cli or not os.path.exists(cli):
        pytest.skip("CLI binary not available")
    out = tmp_path / "out"
    proc = subprocess.run(
        [cli, "norm", "--preset", "ode-test", "--out", str(out)],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads((out / "norm_certificate.json").read_text())
    assert report["status"] == "optimal"
    assert abs(report["gamma"] - math.sqrt(0.5)) < 0.02
