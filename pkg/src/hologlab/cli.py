"""Command-line surface.

Subcommands: gen-field, seminorm, flux-sweep, lemma-sweep, j-sweep,
euler-run, euler-verify, fit, report.  Global flags: --config, --out,
--seed, --threads, --verbose.  Exit codes: 0 success / no violations,
1 inequality violation, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import euler2d, harness
from .errors import (ConfigError, DomainError, PreconditionError, RankError,
                     ResolutionError)
from .fields import gen_smooth_random, load_field, periodic_grid
from .mollify import make_kernel


def _add_common(sp):
    sp.add_argument("--config", help="INI config file (see docs/config_schema.md)")
    sp.add_argument("--out", help="output directory (overrides config)")
    sp.add_argument("--seed", type=int, help="seed override")
    sp.add_argument("--threads", type=int, help="worker threads (speed only)")
    sp.add_argument("--verbose", action="store_true")


def _load_cfg(args, expected_kind: str | None = None) -> harness.SweepConfig:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    cfg = harness.SweepConfig.from_ini(args.config, seed=args.seed,
                                       out_dir=args.out, threads=args.threads)
    if expected_kind and cfg.experiment != expected_kind:
        raise ConfigError(
            f"config declares experiment {cfg.experiment!r}; this subcommand "
            f"runs {expected_kind!r}")
    return cfg


def _run_and_report(cfg: harness.SweepConfig, verbose: bool) -> int:
    rows, summary = harness.run_experiment(cfg)
    if verbose:
        for row in rows:
            print(row)
    n_viol = len(summary.get("violations", []))
    print(f"{cfg.experiment}: {len(rows)} rows -> {cfg.out_dir}/"
          f"{cfg.experiment}.csv ({n_viol} violations)")
    for v in summary.get("violations", []):
        print(f"  VIOLATION: {v}")
    return 1 if n_viol else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hologlab",
        description="Numerical laboratory for log-corrected Holder estimates "
                    "of incompressible flow functionals.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("gen-field", "seminorm", "flux-sweep", "lemma-sweep",
                 "j-sweep", "euler-run", "euler-verify"):
        sp = sub.add_parser(name)
        _add_common(sp)
        if name == "euler-verify":
            sp.add_argument("--trajectory", required=True,
                            help="directory written by euler-run")
            sp.add_argument("--eps", type=float, default=0.1)

    sp = sub.add_parser("fit", help="two-regressor scaling fit of a CSV")
    sp.add_argument("csv_path")
    sp.add_argument("--scale-col", default="epsilon")
    sp.add_argument("--value-col", default="flux")
    _add_common(sp)

    sp = sub.add_parser("report", help="merge summaries and re-check inequalities")
    sp.add_argument("summaries", nargs="+")
    _add_common(sp)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, DomainError, PreconditionError, RankError,
            ResolutionError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "gen-field":
        cfg = _load_cfg(args)
        path = harness.save_generated_field(cfg)
        print(f"wrote {path} (+ .json sidecar)")
        return 0
    if cmd == "seminorm":
        return _run_and_report(_load_cfg(args, "seminorm_report"), args.verbose)
    if cmd == "flux-sweep":
        return _run_and_report(_load_cfg(args, "flux_sweep"), args.verbose)
    if cmd == "lemma-sweep":
        return _run_and_report(_load_cfg(args, "lemma_sweep"), args.verbose)
    if cmd == "j-sweep":
        return _run_and_report(_load_cfg(args, "j_sweep"), args.verbose)
    if cmd == "euler-run":
        return _euler_run(args)
    if cmd == "euler-verify":
        return _euler_verify(args)
    if cmd == "fit":
        return _fit(args)
    if cmd == "report":
        table, merged, code = harness.report(args.summaries)
        print(table)
        out_dir = args.out or "."
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            json.dump(merged, fh, indent=2, sort_keys=True, default=float)
            fh.write("\n")
        return code
    raise ConfigError(f"unknown command {cmd!r}")


def _euler_run(args) -> int:
    cfg = _load_cfg(args, "euler_identity")
    n = int(cfg.euler.get("grid_n", 128))
    dt = float(cfg.euler.get("dt", 1e-3))
    t_end = float(cfg.euler.get("t_end", 0.5))
    snap = int(cfg.euler.get("snapshot_every", 1))
    amp = float(cfg.euler.get("amplitude", 12.0))
    decay = float(cfg.euler.get("decay_rate", 3.0))
    w0 = gen_smooth_random(cfg.seed, decay, periodic_grid(2, n))
    w0 = w0.copy_with(amp * w0.values / np.max(np.abs(w0.values)))
    state0 = euler2d.initial_state(w0)
    traj = euler2d.run(state0, dt, int(round(t_end / dt)), snapshot_every=snap)
    outdir = os.path.join(cfg.out_dir, "trajectory")
    euler2d.save_trajectory(traj, outdir, manifest_extra={
        "dt": dt, "n_steps": int(round(t_end / dt)), "grid": n,
        "seed": cfg.seed, "snapshot_every": snap})
    print(f"wrote {len(traj)} snapshots to {outdir}")
    return 0


def _euler_verify(args) -> int:
    mandir = args.trajectory
    with open(os.path.join(mandir, "trajectory.json")) as fh:
        manifest = json.load(fh)
    traj = []
    for snap in manifest["snapshots"]:
        f = load_field(os.path.join(mandir, snap["file"]))
        traj.append(euler2d.EulerState(omega=f, time=snap["time"]))
    kern = make_kernel(args.eps, traj[0].grid, enforce_floor=False)
    gap, integral, residual = euler2d.verify_energy_identity(traj, kern)
    e0 = euler2d.energy(traj[0])
    print(f"lhs_gap={gap!r} time_integral={integral!r} residual={residual!r} "
          f"residual_rel={residual / e0!r}")
    return 0 if residual / e0 <= 1e-4 else 1


def _fit(args) -> int:
    with open(args.csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    series = [(float(r[args.scale_col]), abs(float(r[args.value_col])))
              for r in rows]
    fit = harness.fit_scaling(series)
    print(json.dumps(asdict(fit), indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
