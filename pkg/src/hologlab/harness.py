"""Experiment orchestration: config ingestion, sweeps, exponent fits, CSV and
JSON persistence, and inequality reporting.

Config files are INI (key/value with nested sections); docs/config_schema.md
documents every section and key, and configs/ holds runnable examples.  Each
experiment writes one CSV (one row per parameter point, every row echoing the
full parameter tuple) and a JSON summary with the inequality checks.  Floats
are serialized with repr(), so reruns of the same config are byte-identical;
worker threads only change speed, never results or row order.

The scaling fit is a two-regressor least squares

    log v = c + p log s + q log log(1/s)

separating the power rate p from the log-correction exponent q; the dyadic
scales must span at least 3 octaves or the regressors are too collinear to
trust, and fits with fewer than 4 points are rejected.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field

import numpy as np

from . import boundary, commutator, euler2d
from .errors import ConfigError, DomainError, RankError
from .fields import (LacunarySpec, bounded_pressure, box_grid, gen_lacunary,
                     gen_smooth_random, periodic_grid, save_field)
from .modulus import Modulus, besov3_seminorm, holog_seminorm
from .mollify import make_kernel

EXPERIMENTS = ("flux_sweep", "lemma_sweep", "j_sweep", "euler_identity",
               "seminorm_report")

CSV_COLUMNS = {
    "flux_sweep": ["experiment", "seed", "field", "alpha", "lambda", "grid_n",
                   "seminorm", "k1", "epsilon", "flux", "bound", "ratio",
                   "residual_identity", "null_flux"],
    "lemma_sweep": ["experiment", "seed", "field", "alpha", "lambda",
                    "seminorm", "h", "sup_value", "integral_value",
                    "bound_sup", "bound_integral"],
    "j_sweep": ["experiment", "seed", "field", "alpha", "lambda", "seminorm",
                "u_sup", "p_max", "h", "epsilon", "grid_n",
                "j21", "j221", "j222", "j31", "j321", "j322",
                "env21", "env221", "env222", "env31", "env321", "env322",
                "total_measured", "total_envelope"],
    "euler_identity": ["experiment", "seed", "grid_n", "dt", "epsilon",
                       "t_end", "energy_initial", "energy_final",
                       "energy_drift_rel", "enstrophy_drift_rel", "lhs_gap",
                       "time_integral", "residual", "residual_rel"],
    "seminorm_report": ["experiment", "seed", "field", "alpha", "lambda",
                        "grid_n", "modulus_alpha", "modulus_lambda", "s_max",
                        "seminorm", "pair_count", "attain_i", "attain_j",
                        "besov_exponent", "besov_value"],
}


@dataclass
class FitReport:
    """Power-law + log-correction fit of a positive scale series."""

    p: float
    q: float
    c: float
    rms_residual: float
    n_points: int


def fit_scaling(records) -> FitReport:
    """Least-squares fit of log v = c + p log s + q log log(1/s).

    records: iterable of (s, v) with 0 < s < 1 and v > 0, at least 4 points
    spanning at least 3 octaves in s.
    """
    pts = [(float(s), float(v)) for s, v in records]
    if len(pts) < 4:
        raise DomainError(f"need at least 4 points for the fit, got {len(pts)}")
    s = np.array([a for a, _ in pts])
    v = np.array([b for _, b in pts])
    if np.any(v <= 0.0):
        raise DomainError(
            "fit requires positive values; fit |v| instead and flag sign changes")
    if np.any((s <= 0.0) | (s >= 1.0)):
        raise DomainError("scales must lie in (0, 1)")
    if np.max(s) == np.min(s):
        raise RankError("all scales equal; regressors are collinear")
    if np.max(s) / np.min(s) < 8.0 * (1.0 - 1e-12):
        raise RankError(
            f"scales span {np.max(s) / np.min(s):.2f}x; need >= 3 octaves (8x) "
            "for a well-conditioned two-regressor fit")
    A = np.column_stack([np.ones_like(s), np.log(s), np.log(np.log(1.0 / s))])
    y = np.log(v)
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < 3:
        raise RankError("rank-deficient regressor matrix")
    resid = y - A @ coef
    return FitReport(p=float(coef[1]), q=float(coef[2]), c=float(coef[0]),
                     rms_residual=float(np.sqrt(np.mean(resid ** 2))),
                     n_points=len(pts))


# ---------------------------------------------------------------------------
# configuration


@dataclass
class SweepConfig:
    """Validated experiment configuration (see docs/config_schema.md)."""

    experiment: str
    seed: int = 0
    threads: int = 1
    out_dir: str = "results"
    field: dict = dc_field(default_factory=dict)
    modulus: dict = dc_field(default_factory=dict)
    sweep: dict = dc_field(default_factory=dict)
    pressure: dict = dc_field(default_factory=dict)
    euler: dict = dc_field(default_factory=dict)

    @classmethod
    def from_ini(cls, path: str, seed: int | None = None,
                 out_dir: str | None = None, threads: int | None = None) -> "SweepConfig":
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        cp.read(path)
        if "experiment" not in cp:
            raise ConfigError("config needs an [experiment] section")
        exp = cp["experiment"]
        cfg = cls(
            experiment=exp.get("kind", ""),
            seed=exp.getint("seed", 0),
            threads=exp.getint("threads", 1),
            out_dir=cp.get("output", "out_dir", fallback="results"),
            field=dict(cp["field"]) if "field" in cp else {},
            modulus=dict(cp["modulus"]) if "modulus" in cp else {},
            sweep=dict(cp["sweep"]) if "sweep" in cp else {},
            pressure=dict(cp["pressure"]) if "pressure" in cp else {},
            euler=dict(cp["euler"]) if "euler" in cp else {},
        )
        if seed is not None:
            cfg.seed = seed
        if out_dir is not None:
            cfg.out_dir = out_dir
        if threads is not None:
            cfg.threads = threads
        cfg.validate()
        return cfg

    def _floats(self, section: dict, key: str) -> list[float]:
        raw = section.get(key, "")
        vals = [t.strip() for t in raw.split(",") if t.strip()]
        return [float(t) for t in vals]

    def eps_list(self) -> list[float]:
        return self._floats(self.sweep, "eps_list")

    def h_list(self) -> list[float]:
        return self._floats(self.sweep, "h_list")

    def make_modulus(self) -> Modulus:
        kind = self.modulus.get("kind", "holog")
        alpha = float(self.modulus.get("alpha", self.field.get("alpha", 1.0 / 3.0)))
        s_max = float(self.modulus.get("s_max", 0.5))
        if kind == "holog":
            lam = float(self.modulus.get("lambda", self.field.get("lambda", 0.0)))
            return Modulus.holog(alpha, lam, s_max=s_max)
        if kind == "holder":
            return Modulus.holder(alpha, s_max=s_max)
        if kind == "general":
            table = self.modulus.get("omega_table", "")
            if not table:
                raise ConfigError("general modulus needs omega_table = <csv path>")
            data = np.loadtxt(table, delimiter=",")

            def omega(s, _d=data):
                return np.interp(s, _d[:, 0], _d[:, 1])
            return Modulus.general(alpha, omega, s_max=s_max)
        raise ConfigError(f"unknown modulus kind {kind!r}")

    def validate(self) -> None:
        """Check every precondition up front; report all violations at once."""
        problems = []
        if self.experiment not in EXPERIMENTS:
            problems.append(
                f"experiment kind must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.threads < 1:
            problems.append(f"threads must be >= 1, got {self.threads}")
        if self.experiment == "flux_sweep":
            eps = self.eps_list()
            if not eps:
                problems.append("flux_sweep needs a non-empty sweep.eps_list")
            n = int(self.field.get("grid_n", 0))
            if n <= 0:
                problems.append("field.grid_n must be positive")
            floor_on = self.sweep.get("enforce_kernel_floor", "true").lower() != "false"
            for e in eps:
                if not 0.0 < e < 1.0:
                    problems.append(f"eps = {e} outside (0, 1)")
                elif n > 0 and floor_on and e < 4.0 * (2.0 * np.pi / n):
                    problems.append(
                        f"eps = {e} below the kernel floor 4*dx = {4 * 2 * np.pi / n:.5g}")
            if self.field.get("type", "lacunary") == "lacunary" and n > 0:
                b = int(self.field.get("base", 2))
                k = int(self.field.get("levels", 7))
                if b ** k > n / 4:
                    problems.append(
                        f"lacunary top mode b^K = {b ** k} unresolved on n = {n} (need <= n/4)")
        if self.experiment in ("lemma_sweep", "j_sweep"):
            hs = self.h_list()
            if not hs:
                problems.append(f"{self.experiment} needs a non-empty sweep.h_list")
            for h in hs:
                if not 0.0 < h < 0.5:
                    problems.append(f"h = {h} outside (0, min(h0,1)) = (0, 0.5)")
        if self.experiment == "j_sweep":
            alpha = float(self.modulus.get("alpha", self.field.get("alpha", 1.0 / 3.0)))
            for h in self.h_list():
                if 0.0 < h < 0.5:
                    e = h ** (2.0 / (1.0 + alpha))
                    if e >= h / 4.0:
                        problems.append(
                            f"coupling violated at h = {h}: eps = {e:.5g} >= h/4 = {h / 4:.5g}")
        if self.experiment == "euler_identity":
            if float(self.euler.get("dt", 1e-3)) <= 0:
                problems.append("euler.dt must be positive")
            if int(self.euler.get("grid_n", 128)) < 32:
                problems.append("euler.grid_n must be >= 32")
        if problems:
            raise ConfigError("; ".join(problems))


# ---------------------------------------------------------------------------
# experiment implementations


def _make_field(cfg: SweepConfig):
    ftype = cfg.field.get("type", "lacunary")
    n = int(cfg.field.get("grid_n", 512))
    dim = int(cfg.field.get("dim", 2))
    if ftype == "lacunary":
        spec = LacunarySpec(
            alpha=float(cfg.field.get("alpha", 1.0 / 3.0)),
            lam=float(cfg.field.get("lambda", 0.0)),
            base=int(cfg.field.get("base", 2)),
            levels=int(cfg.field.get("levels", 7)),
            seed=cfg.seed,
        )
        return gen_lacunary(spec, periodic_grid(dim, n))
    if ftype == "smooth_random":
        f = gen_smooth_random(cfg.seed, float(cfg.field.get("decay_rate", 4.0)),
                              periodic_grid(dim, n),
                              components=int(cfg.field.get("components", 1)))
        amp = float(cfg.field.get("amplitude", 1.0))
        return f.copy_with(amp * f.values / np.max(np.abs(f.values)))
    raise ConfigError(f"unknown field type {ftype!r}")


def _disk_field(cfg: SweepConfig, mod: Modulus):
    ftype = cfg.field.get("type", "tangential_rough")
    if ftype == "rotation":
        return boundary.rotation_field()
    if ftype == "linear_vanishing":
        return boundary.linear_vanishing_field()
    if ftype == "near_extremal":
        return boundary.near_extremal_field(mod)
    if ftype == "tangential_rough":
        spec = LacunarySpec(
            alpha=float(cfg.field.get("alpha", mod.alpha)),
            lam=float(cfg.field.get("lambda", mod.lam)),
            base=int(cfg.field.get("base", 2)),
            levels=int(cfg.field.get("levels", 7)),
            seed=cfg.seed,
        )
        return boundary.tangential_rough_velocity(spec)
    raise ConfigError(f"unknown disk field type {ftype!r}")


def _run_flux_sweep(cfg: SweepConfig):
    u = _make_field(cfg)
    mod = cfg.make_modulus()
    rep = holog_seminorm(u, mod)
    eps_list = cfg.eps_list()
    floor_on = cfg.sweep.get("enforce_kernel_floor", "true").lower() != "false"

    def point(eps):
        k = make_kernel(eps, u.grid, enforce_floor=floor_on)
        fs = commutator.energy_flux(u, k, mod=mod, seminorm=rep.value)
        return fs, k.k1

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            results = list(ex.map(point, eps_list))
    else:
        results = [point(e) for e in eps_list]
    rows, violations = [], []
    base = {"experiment": cfg.experiment, "seed": cfg.seed,
            "field": cfg.field.get("type", "lacunary"),
            "alpha": float(cfg.field.get("alpha", 1.0 / 3.0)),
            "lambda": float(cfg.field.get("lambda", 0.0)),
            "grid_n": u.grid.n, "seminorm": rep.value}
    scale = u.max_abs() ** 2
    for fs, k1 in results:
        row = dict(base, k1=k1, epsilon=fs.eps, flux=fs.flux, bound=fs.bound,
                   ratio=abs(fs.flux) / fs.bound if fs.bound > 0 else float("nan"),
                   residual_identity=fs.residual_identity, null_flux=fs.null_flux)
        rows.append(row)
        if abs(fs.flux) > fs.bound:
            violations.append(f"flux exceeds bound at eps = {fs.eps}")
        if fs.residual_identity > 1e-10 * scale:
            violations.append(f"commutator identity residual too large at eps = {fs.eps}")
    summary = {"violations": violations, "seminorm": rep.value,
               "pair_count": rep.pair_count}
    fluxes = [(r["epsilon"], abs(r["flux"])) for r in rows]
    try:
        fit = fit_scaling(fluxes)
        summary["fit"] = asdict(fit)
    except (DomainError, RankError) as e:
        summary["fit_error"] = str(e)
    return rows, summary


def _run_lemma_sweep(cfg: SweepConfig):
    mod = cfg.make_modulus()
    w = _disk_field(cfg, mod)
    recs, consts = boundary.lemma_sweep(
        w, mod, cfg.h_list(),
        n_r=int(cfg.sweep.get("n_r", 64)),
        n_theta=int(cfg.sweep.get("n_theta", 4096)),
        seminorm_n=int(cfg.sweep.get("seminorm_n", 512)))
    rows, violations = [], []
    base = {"experiment": cfg.experiment, "seed": cfg.seed, "field": w.name,
            "alpha": mod.alpha, "lambda": mod.lam, "seminorm": consts["seminorm"]}
    for r in recs:
        rows.append(dict(base, h=r.h, sup_value=r.sup_value,
                         integral_value=r.integral_value, bound_sup=r.bound_sup,
                         bound_integral=r.bound_integral))
        if r.sup_value > r.bound_sup:
            violations.append(f"sup estimate violated at h = {r.h}")
        if r.integral_value > r.bound_integral:
            violations.append(f"integral estimate violated at h = {r.h}")
    summary = {"violations": violations, "constants": consts,
               "eta_prime_max": boundary.eta_prime_max()}
    sups = [(r.h, r.sup_value) for r in recs if r.sup_value > 0]
    ints = [(r.h, r.integral_value) for r in recs if r.integral_value > 0]
    for name, series in (("fit_sup", sups), ("fit_integral", ints)):
        try:
            summary[name] = asdict(fit_scaling(series))
        except (DomainError, RankError) as e:
            summary[name + "_error"] = str(e)
    return rows, summary


def _run_j_sweep(cfg: SweepConfig):
    mod = cfg.make_modulus()
    u = _disk_field(cfg, mod)
    p_sampled = bounded_pressure(int(cfg.pressure.get("seed", 3)),
                                 box_grid(2, 512, -1.5, 1.5),
                                 p_max=float(cfg.pressure.get("p_max", 1.0)))
    p = boundary.PressureField.from_sampled(p_sampled)
    recs, consts = boundary.j_sweep(
        u, p, mod, cfg.h_list(),
        resolution_factor=float(cfg.sweep.get("resolution_factor", 8.0)),
        seminorm_n=int(cfg.sweep.get("seminorm_n", 512)),
        dtype=cfg.sweep.get("dtype", "auto"))
    rows, violations = [], []
    base = {"experiment": cfg.experiment, "seed": cfg.seed, "field": u.name,
            "alpha": mod.alpha, "lambda": mod.lam,
            "seminorm": consts["seminorm"], "u_sup": consts["sup"],
            "p_max": p.p_max}
    names = ("j21", "j221", "j222", "j31", "j321", "j322")
    for r in recs:
        row = dict(base, h=r.h, epsilon=r.eps, grid_n=r.grid_n,
                   total_measured=r.total_measured, total_envelope=r.total_envelope)
        for nm in names:
            row[nm] = getattr(r, nm)
            row["env" + nm[1:]] = getattr(r, "env" + nm[1:])
            if abs(row[nm]) > row["env" + nm[1:]]:
                violations.append(f"{nm} exceeds its envelope at h = {r.h}")
        rows.append(row)
    env = [r.total_envelope for r in recs]
    order = np.argsort([-r.h for r in recs])
    env_sorted = [env[i] for i in order]
    if any(b >= a for a, b in zip(env_sorted, env_sorted[1:])):
        violations.append("total envelope is not monotone decreasing in h")
    summary = {"violations": violations, "constants": consts,
               "eta_prime_max": boundary.eta_prime_max()}
    return rows, summary


def _run_euler_identity(cfg: SweepConfig):
    n = int(cfg.euler.get("grid_n", 128))
    dt = float(cfg.euler.get("dt", 1e-3))
    t_end = float(cfg.euler.get("t_end", 0.5))
    eps = float(cfg.euler.get("eps", 0.1))
    amp = float(cfg.euler.get("amplitude", 12.0))
    decay = float(cfg.euler.get("decay_rate", 3.0))
    grid = periodic_grid(2, n)
    w0 = gen_smooth_random(cfg.seed, decay, grid)
    w0 = w0.copy_with(amp * w0.values / np.max(np.abs(w0.values)))
    state0 = euler2d.initial_state(w0)
    e0, z0 = euler2d.energy(state0), euler2d.enstrophy(state0)
    kern = make_kernel(eps, grid, enforce_floor=False)
    rows, violations = [], []
    residuals = {}
    for this_dt in (dt, 0.5 * dt):
        traj = euler2d.run(state0, this_dt, int(round(t_end / this_dt)),
                           snapshot_every=1)
        gap, integral, residual = euler2d.verify_energy_identity(traj, kern)
        e1, z1 = euler2d.energy(traj[-1]), euler2d.enstrophy(traj[-1])
        residuals[this_dt] = residual
        rows.append({
            "experiment": cfg.experiment, "seed": cfg.seed, "grid_n": n,
            "dt": this_dt, "epsilon": eps, "t_end": t_end,
            "energy_initial": e0, "energy_final": e1,
            "energy_drift_rel": abs(e1 - e0) / e0,
            "enstrophy_drift_rel": abs(z1 - z0) / z0,
            "lhs_gap": gap, "time_integral": integral,
            "residual": residual, "residual_rel": residual / e0,
        })
        if abs(e1 - e0) / e0 > 1e-8:
            violations.append(f"energy drift exceeds 1e-8 at dt = {this_dt}")
        if residual / e0 > 1e-4:
            violations.append(f"identity residual exceeds 1e-4 E0 at dt = {this_dt}")
    shrink = residuals[dt] / residuals[0.5 * dt] if residuals[0.5 * dt] > 0 else float("inf")
    if shrink < 4.0:
        violations.append(
            f"identity residual shrank only {shrink:.2f}x when dt halved (need >= 4x)")
    summary = {"violations": violations, "residual_shrink": shrink,
               "energy_initial": e0}
    return rows, summary


def _run_seminorm_report(cfg: SweepConfig):
    f = _make_field(cfg)
    mod = cfg.make_modulus()
    rep = holog_seminorm(f, mod)
    row = {"experiment": cfg.experiment, "seed": cfg.seed,
           "field": cfg.field.get("type", "lacunary"),
           "alpha": float(cfg.field.get("alpha", 1.0 / 3.0)),
           "lambda": float(cfg.field.get("lambda", 0.0)),
           "grid_n": f.grid.n, "modulus_alpha": mod.alpha,
           "modulus_lambda": mod.lam, "s_max": mod.s_max,
           "seminorm": rep.value, "pair_count": rep.pair_count,
           "attain_i": str(rep.attaining_pair[0]),
           "attain_j": str(rep.attaining_pair[1]),
           "besov_exponent": "", "besov_value": ""}
    rows = [row]
    if f.grid.periodic:
        exponent = float(cfg.sweep.get("besov_exponent", 1.0 / 3.0))
        val, _profile = besov3_seminorm(f, exponent)
        row["besov_exponent"] = exponent
        row["besov_value"] = val
    return rows, {"violations": []}


_RUNNERS = {
    "flux_sweep": _run_flux_sweep,
    "lemma_sweep": _run_lemma_sweep,
    "j_sweep": _run_j_sweep,
    "euler_identity": _run_euler_identity,
    "seminorm_report": _run_seminorm_report,
}


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest round-trip, byte-stable across reruns
    return str(v)


def run_experiment(cfg: SweepConfig):
    """Execute the configured experiment; write CSV + JSON summary; return
    (rows, summary).  Deterministic given the config."""
    cfg.validate()
    rows, summary = _RUNNERS[cfg.experiment](cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    cols = CSV_COLUMNS[cfg.experiment]
    csv_path = os.path.join(cfg.out_dir, cfg.experiment + ".csv")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_fmt(row.get(c, "")) for c in cols])
    with open(csv_path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    summary_path = os.path.join(cfg.out_dir, cfg.experiment + "_summary.json")
    summary_full = {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "csv": os.path.basename(csv_path),
        "rows": len(rows),
        **summary,
    }
    with open(summary_path, "w") as fh:
        json.dump(summary_full, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return rows, summary_full


# ---------------------------------------------------------------------------
# report: merge summaries, re-validate CSV rows, flag violations

_ROW_CHECKS = {
    "flux_sweep": [("|flux| <= bound", lambda r: abs(float(r["flux"])) <= float(r["bound"]))],
    "lemma_sweep": [
        ("sup_value <= bound_sup",
         lambda r: float(r["sup_value"]) <= float(r["bound_sup"])),
        ("integral_value <= bound_integral",
         lambda r: float(r["integral_value"]) <= float(r["bound_integral"])),
    ],
    "j_sweep": [(f"|{nm}| <= env{nm[1:]}",
                 lambda r, _n=nm: abs(float(r[_n])) <= float(r["env" + _n[1:]]))
                for nm in ("j21", "j221", "j222", "j31", "j321", "j322")],
    "euler_identity": [
        ("energy_drift_rel <= 1e-8",
         lambda r: float(r["energy_drift_rel"]) <= 1e-8),
        ("residual_rel <= 1e-4",
         lambda r: float(r["residual_rel"]) <= 1e-4),
    ],
    "seminorm_report": [],
}


def report(summary_paths) -> tuple[str, dict, int]:
    """Merge experiment summaries, re-check every row-level inequality from
    the CSVs, and return (table, merged_json, exit_code)."""
    merged = {"experiments": {}, "violations": []}
    lines = []
    for path in summary_paths:
        if not os.path.exists(path):
            raise OSError(f"summary not found: {path}")
        with open(path) as fh:
            summary = json.load(fh)
        exp = summary.get("experiment", "?")
        merged["experiments"][exp] = summary
        violations = list(summary.get("violations", []))
        csv_path = os.path.join(os.path.dirname(path), summary.get("csv", ""))
        if summary.get("csv") and os.path.exists(csv_path):
            with open(csv_path, newline="") as fh:
                for i, row in enumerate(csv.DictReader(fh)):
                    for label, check in _ROW_CHECKS.get(exp, []):
                        try:
                            ok = check(row)
                        except (KeyError, ValueError):
                            ok = False
                        if not ok:
                            violations.append(
                                f"{exp} row {i}: {label} fails")
        merged["experiments"][exp]["violations"] = violations
        merged["violations"].extend(f"{exp}: {v}" for v in violations)
        lines.append(f"{exp:18s} rows={summary.get('rows', '?'):>4} "
                     f"violations={len(violations)}")
        for v in violations:
            lines.append(f"    VIOLATION: {v}")
    code = 1 if merged["violations"] else 0
    lines.append("status: " + ("VIOLATIONS FOUND" if code else "all inequalities hold"))
    return "\n".join(lines), merged, code


def save_generated_field(cfg: SweepConfig) -> str:
    """gen-field entry: build the configured field and persist it."""
    f = _make_field(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "field.bin")
    save_field(f, path)
    return path
