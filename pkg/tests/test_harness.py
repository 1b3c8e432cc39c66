"""Fit engine, experiment orchestration, persistence, and the CLI surface."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from hologlab.errors import ConfigError, DomainError, RankError
from hologlab.harness import (SweepConfig, fit_scaling, report, run_experiment)

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def test_fit_exact_power_law():
    s = [0.5 ** k for k in range(1, 8)]
    fit = fit_scaling([(x, 7.0 * x ** 2) for x in s])
    assert fit.p == pytest.approx(2.0, abs=1e-10)
    assert fit.q == pytest.approx(0.0, abs=1e-10)
    assert fit.c == pytest.approx(np.log(7.0), abs=1e-10)
    assert fit.rms_residual <= 1e-10
    assert fit.n_points == 7


def test_fit_exact_log_model_critical_pair():
    # the scale-free member with cubed log correction: p = 0, q = -3
    s = [0.5 ** k for k in range(2, 9)]
    fit = fit_scaling([(x, np.log(1.0 / x) ** (-3.0)) for x in s])
    assert fit.p == pytest.approx(0.0, abs=1e-10)
    assert fit.q == pytest.approx(-3.0, abs=1e-10)
    assert fit.rms_residual <= 1e-10


def test_fit_mixed_model():
    s = [0.5 ** k for k in range(1, 10)]
    fit = fit_scaling([(x, 3.0 * x ** 0.7 * np.log(1.0 / x) ** 1.5) for x in s])
    assert fit.p == pytest.approx(0.7, abs=1e-10)
    assert fit.q == pytest.approx(1.5, abs=1e-10)


def test_fit_errors():
    with pytest.raises(DomainError, match="4 points"):
        fit_scaling([(0.5, 1.0), (0.25, 1.0), (0.125, 1.0)])
    with pytest.raises(DomainError, match="positive"):
        fit_scaling([(0.5, 1.0), (0.25, -1.0), (0.125, 1.0), (0.0625, 1.0)])
    with pytest.raises(RankError, match="collinear"):
        fit_scaling([(0.25, 1.0)] * 5)
    with pytest.raises(RankError, match="octaves"):
        fit_scaling([(0.5, 1.0), (0.4, 1.1), (0.3, 1.2), (0.26, 1.3)])
    with pytest.raises(DomainError, match="\\(0, 1\\)"):
        fit_scaling([(2.0, 1.0), (1.0, 1.0), (0.5, 1.0), (0.25, 1.0)])


def _cfg(tmp_path, text):
    path = os.path.join(tmp_path, "cfg.ini")
    with open(path, "w") as fh:
        fh.write(text)
    return path


FLUX_INI = """
[experiment]
kind = flux_sweep
seed = 12

[field]
type = lacunary
alpha = 0.4
lambda = 0.0
base = 2
levels = 5
dim = 2
grid_n = 256

[modulus]
kind = holog
alpha = 0.4
lambda = 0.0

[sweep]
eps_list = 0.4, 0.2, 0.1

[output]
out_dir = {out}
"""


def test_config_validation_lists_every_problem(tmp_path):
    bad = """
[experiment]
kind = flux_sweep

[field]
grid_n = 256
levels = 9

[sweep]
eps_list = 1.5, 0.01
"""
    path = _cfg(tmp_path, bad)
    with pytest.raises(ConfigError) as exc:
        SweepConfig.from_ini(path)
    msg = str(exc.value)
    assert "1.5" in msg          # out of range eps
    assert "0.01" in msg         # below kernel floor
    assert "unresolved" in msg   # lacunary top mode


def test_config_empty_eps_list(tmp_path):
    path = _cfg(tmp_path, """
[experiment]
kind = flux_sweep

[field]
grid_n = 256
""")
    with pytest.raises(ConfigError, match="eps_list"):
        SweepConfig.from_ini(path)


def test_flux_sweep_rows_and_determinism(tmp_path):
    out1 = os.path.join(tmp_path, "a")
    out2 = os.path.join(tmp_path, "b")
    cfg1 = SweepConfig.from_ini(_cfg(tmp_path, FLUX_INI.format(out=out1)))
    rows, summary = run_experiment(cfg1)
    assert len(rows) == 3
    assert summary["violations"] == []
    cfg2 = SweepConfig.from_ini(_cfg(tmp_path, FLUX_INI.format(out=out2)))
    cfg2.threads = 2
    run_experiment(cfg2)
    a = open(os.path.join(out1, "flux_sweep.csv"), "rb").read()
    b = open(os.path.join(out2, "flux_sweep.csv"), "rb").read()
    assert a == b  # byte-identical across reruns and thread counts
    header = a.decode().splitlines()[0].split(",")
    for col in ("epsilon", "flux", "bound", "ratio", "residual_identity",
                "null_flux"):
        assert col in header


def test_report_merges_and_flags(tmp_path):
    out = os.path.join(tmp_path, "run")
    cfg = SweepConfig.from_ini(_cfg(tmp_path, FLUX_INI.format(out=out)))
    run_experiment(cfg)
    spath = os.path.join(out, "flux_sweep_summary.json")
    table, merged, code = report([spath])
    assert code == 0
    assert "flux_sweep" in merged["experiments"]
    assert "all inequalities hold" in table
    # corrupt one CSV value above its bound -> named violation, exit 1
    csv_path = os.path.join(out, "flux_sweep.csv")
    lines = open(csv_path).read().splitlines()
    header = lines[0].split(",")
    row = lines[1].split(",")
    row[header.index("flux")] = repr(float(row[header.index("bound")]) * 10.0)
    lines[1] = ",".join(row)
    open(csv_path, "w").write("\n".join(lines) + "\n")
    table, merged, code = report([spath])
    assert code == 1
    assert "row 0" in table and "flux" in table


def test_report_missing_file():
    with pytest.raises(OSError, match="not found"):
        report(["/nonexistent/summary.json"])


def test_seminorm_report_experiment(tmp_path):
    out = os.path.join(tmp_path, "sem")
    path = _cfg(tmp_path, f"""
[experiment]
kind = seminorm_report
seed = 7

[field]
type = lacunary
alpha = 0.3333333333333333
lambda = 1.0
base = 2
levels = 6
dim = 1
grid_n = 512

[modulus]
kind = holog
alpha = 0.3333333333333333
lambda = 1.0

[output]
out_dir = {out}
""")
    rows, summary = run_experiment(SweepConfig.from_ini(path))
    assert len(rows) == 1
    assert rows[0]["seminorm"] > 0
    assert rows[0]["besov_value"] > 0


def test_cli_end_to_end(tmp_path):
    env = dict(os.environ)
    out = os.path.join(tmp_path, "cli")
    cfgpath = _cfg(tmp_path, FLUX_INI.format(out=out))
    r = subprocess.run(
        [sys.executable, "-m", "hologlab.cli", "flux-sweep", "--config", cfgpath],
        capture_output=True, text=True, env=env)
    assert r.returncode == 0, r.stderr
    assert os.path.exists(os.path.join(out, "flux_sweep.csv"))
    r = subprocess.run(
        [sys.executable, "-m", "hologlab.cli", "report",
         os.path.join(out, "flux_sweep_summary.json"), "--out", out],
        capture_output=True, text=True, env=env)
    assert r.returncode == 0, r.stderr
    assert os.path.exists(os.path.join(out, "report.json"))
    r = subprocess.run(
        [sys.executable, "-m", "hologlab.cli", "fit",
         os.path.join(out, "flux_sweep.csv")],
        capture_output=True, text=True, env=env)
    # three points only: the fit correctly refuses
    assert r.returncode != 0 or "p" in r.stdout


def test_cli_config_error_exit_code(tmp_path):
    path = _cfg(tmp_path, "[experiment]\nkind = bogus\n")
    r = subprocess.run(
        [sys.executable, "-m", "hologlab.cli", "flux-sweep", "--config", path],
        capture_output=True, text=True)
    assert r.returncode == 2
    r = subprocess.run(
        [sys.executable, "-m", "hologlab.cli", "flux-sweep", "--config",
         "/does/not/exist.ini"], capture_output=True, text=True)
    assert r.returncode == 2


def test_cli_gen_field_and_seed_override(tmp_path):
    out = os.path.join(tmp_path, "gen")
    cfgpath = _cfg(tmp_path, FLUX_INI.format(out=out))
    r = subprocess.run(
        [sys.executable, "-m", "hologlab.cli", "gen-field", "--config", cfgpath,
         "--seed", "99", "--out", out],
        capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    sidecar = json.load(open(os.path.join(out, "field.bin.json")))
    assert sidecar["spec"]["seed"] == 99


def test_euler_run_then_verify_cli(tmp_path):
    out = os.path.join(tmp_path, "eu")
    cfgpath = _cfg(tmp_path, f"""
[experiment]
kind = euler_identity
seed = 11

[euler]
grid_n = 64
dt = 2e-3
t_end = 0.05
snapshot_every = 1
eps = 0.4
amplitude = 4.0
decay_rate = 3.0

[output]
out_dir = {out}
""")
    r = subprocess.run(
        [sys.executable, "-m", "hologlab.cli", "euler-run", "--config", cfgpath],
        capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    traj_dir = os.path.join(out, "trajectory")
    assert os.path.exists(os.path.join(traj_dir, "trajectory.json"))
    r = subprocess.run(
        [sys.executable, "-m", "hologlab.cli", "euler-verify",
         "--trajectory", traj_dir, "--eps", "0.4"],
        capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert "residual" in r.stdout
