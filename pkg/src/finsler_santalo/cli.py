"""Command-line front end: ``finsler-santalo <command> --config FILE``.

Configs are plain ``key = value`` lines with ``#`` comments; nested keys use
dotted names.  Every run writes ``<command>.json`` (deterministic, embeds the
resolved config), ``<command>.csv`` and ``<command>.meta.json`` (timings).
Exit codes: 0 all checks pass, 1 a check failed, 2 config error, 3 numerical
failure.
"""
import argparse
import csv
import json
import os
import platform
import sys
import time
import traceback
from importlib import resources

import numpy as np

from . import __version__
from . import bounds as bd
from . import metric as mc
from ._accel import numba_enabled
from .domains import Domain
from .errors import ConfigError, FinslerError, InvalidDomainError, InvalidInputError
from .geodesics import builtin_integrand
from .measures import MeasureKind
from .santalo import Quadrature, verify
from .spectral import disk_eigenvalue, hemisphere_eigenvalue, minimize

SCHEMA_VERSION = 1
REQUIRED = object()
COMMANDS = ("verify-santalo", "funk-report", "eigenvalue", "bounds", "constants")

# key -> (parser name, default)
SCHEMA = {
    "metric.family": ("str", REQUIRED),
    "metric.dim": ("int", 2),
    "metric.a": ("floats", "1 0 0 1"),
    "metric.b": ("floats", "0 0"),
    "metric.radius": ("float", 1.0),
    "metric.reverse": ("bool", False),
    "measure": ("str", REQUIRED),
    "domain.type": ("str", REQUIRED),
    "domain.radius": ("float", 1.0),
    "domain.a": ("float", 1.0),
    "domain.b": ("float", 1.0),
    "domain.width": ("float", 2.0),
    "domain.height": ("float", 2.0),
    "quadrature.boundary": ("int", 256),
    "quadrature.hemisphere": ("int", 128),
    "quadrature.radial": ("int", 32),
    "quadrature.angular": ("int", 64),
    "quadrature.indicatrix": ("int", 128),
    "flow.dt": ("float", 1e-3),
    "flow.t_max": ("float", 50.0),
    "flow.backend": ("str", "auto"),
    "santalo.integrands": ("strs", "one, bump"),
    "santalo.tol": ("float", 1e-3),
    "santalo.bump.center": ("floats", "0.1 0.05"),
    "santalo.bump.width": ("float", 0.3),
    "santalo.bump.tilt": ("float", 0.5),
    "funk.r": ("float", 0.5),
    "funk.tol.mu": ("float", 1e-3),
    "funk.tol.area": ("float", 1e-3),
    "funk.tol.lambda": ("float", 1e-2),
    "funk.tol.diam": ("float", 1e-2),
    "funk.tol.omega": ("float", 2e-3),
    "eigen.resolution": ("int", 128),
    "eigen.iters": ("int", 500),
    "eigen.oracle_tol": ("float", 0.03),
    "bounds.boundary_points": ("int", 256),
    "bounds.samples": ("int", 1000),
    "bounds.distortion_samples": ("int", 10000),
    "bounds.seed": ("int", 0),
    "bounds.ball_radii": ("floats", "0.3 0.7"),
    "bounds.cor55.b": ("floats", "0.3 0"),
    "bounds.cor55.resolution": ("int", 48),
    "constants.splits": ("splits", "0 0 3.141592653589793; 0 0.5 3.141592653589793"),
    "constants.eps": ("floats", "0.2 0.1 0.05"),
    "constants.rtol": ("float", 1e-2),
    "constants.resolution": ("int", 48),
    "workers": ("int", 1),
}

NEEDS = {
    "verify-santalo": ("metric.family", "measure", "domain.type"),
    "funk-report": ("measure",),
    "eigenvalue": ("metric.family", "measure", "domain.type"),
    "bounds": ("metric.family", "measure", "domain.type"),
    "constants": ("metric.family", "measure"),
}

TOL_KEY = {"verify-santalo": ("santalo.tol",), "eigenvalue": ("eigen.oracle_tol",),
           "constants": ("constants.rtol",), "bounds": (),
           "funk-report": ("funk.tol.mu", "funk.tol.area", "funk.tol.lambda", "funk.tol.diam",
                           "funk.tol.omega")}

MINIMUMS = {"quadrature.boundary": 8, "quadrature.hemisphere": 4, "quadrature.radial": 2,
            "quadrature.angular": 8, "quadrature.indicatrix": 16, "eigen.resolution": 32,
            "eigen.iters": 1, "bounds.boundary_points": 1, "bounds.samples": 1,
            "bounds.distortion_samples": 1, "bounds.cor55.resolution": 16,
            "constants.resolution": 16, "metric.dim": 2, "workers": 1}


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def parse_config_text(text):
    """Raw ``key = value`` pairs; later duplicates are an error."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}", key)
        out[key] = value
    return out


def _convert(key, kind, raw):
    try:
        if kind == "str":
            return str(raw).strip().lower()
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if isinstance(raw, bool):
                return raw
            v = str(raw).strip().lower()
            if v not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(v)
            return v in ("true", "yes", "1")
        if kind == "floats":
            return [float(t) for t in str(raw).replace(",", " ").split()]
        if kind == "strs":
            return [t.strip().lower() for t in str(raw).split(",") if t.strip()]
        if kind == "splits":
            rows = [[float(t) for t in part.replace(",", " ").split()] for part in str(raw).split(";")
                    if part.strip()]
            if any(len(r) != 3 for r in rows):
                raise ValueError("each split needs offset amplitude gap")
            return rows
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})", key) from None
    raise AssertionError(kind)


def resolve_config(raw, command, overrides=None):
    """Validated config with every schema key present (defaults filled in)."""
    raw = dict(raw)
    raw.update(overrides or {})
    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r}", unknown[0])
    for key in NEEDS[command]:
        if key not in raw:
            raise ConfigError(f"missing required config key {key!r}", key)
    cfg = {}
    for key, (kind, default) in SCHEMA.items():
        if key in raw:
            cfg[key] = _convert(key, kind, raw[key])
        elif default is REQUIRED:
            cfg[key] = None
        else:
            cfg[key] = _convert(key, kind, default)
    for key, val in cfg.items():
        if (key.endswith("tol") or ".tol." in key or key in ("flow.dt", "flow.t_max")) and not val > 0:
            raise ConfigError(f"{key!r} must be > 0", key)
        if key in MINIMUMS and val < MINIMUMS[key]:
            raise ConfigError(f"{key!r} must be >= {MINIMUMS[key]}", key)
    if cfg["measure"] is not None:
        try:
            cfg["measure"] = MeasureKind.parse(cfg["measure"]).value
        except (ValueError, KeyError):
            raise ConfigError(f"bad value for 'measure': {cfg['measure']!r}", "measure") from None
    if cfg["flow.backend"] not in ("auto", "numba", "numpy"):
        raise ConfigError("'flow.backend' must be auto, numba or numpy", "flow.backend")
    if not 0 < cfg["funk.r"] < 1:
        raise ConfigError("'funk.r' must lie in (0, 1)", "funk.r")
    return cfg


def load_config(path):
    """Read a config file; a bare name resolves to a bundled config."""
    if path is None:
        raise ConfigError("no config given (--config PATH)", "config")
    if not os.path.exists(path):
        name = path if path.endswith(".cfg") else path + ".cfg"
        res = resources.files("finsler_santalo") / "configs" / name
        if not res.is_file():
            raise ConfigError(f"config file not found: {path}", "config")
        return parse_config_text(res.read_text())
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def bundled_configs():
    root = resources.files("finsler_santalo") / "configs"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def build_metric(cfg):
    fam, n = cfg["metric.family"], cfg["metric.dim"]
    if fam == "euclidean":
        m = mc.Euclidean(n)
    elif fam == "funk":
        m = mc.FunkBall(n)
    elif fam == "randers":
        a, b = cfg["metric.a"], cfg["metric.b"]
        if len(a) != n * n or len(b) != n:
            raise ConfigError("'metric.a' needs dim^2 entries and 'metric.b' dim entries", "metric.a")
        m = mc.Randers.constant(np.reshape(a, (n, n)), b)
    elif fam == "sphere-chart":
        m = mc.Riemannian.round_sphere_chart(cfg["metric.radius"], n)
    else:
        raise ConfigError(f"unknown metric family {fam!r}", "metric.family")
    return m.reverse() if cfg["metric.reverse"] else m


def build_domain(cfg):
    t, n = cfg["domain.type"], cfg["metric.dim"]
    if t == "ball":
        return Domain.ball(cfg["domain.radius"], n)
    if n != 2:
        raise ConfigError(f"domain {t!r} is planar", "domain.type")
    if t == "ellipse":
        return Domain.ellipse(cfg["domain.a"], cfg["domain.b"])
    if t == "rectangle":
        return Domain.rectangle(cfg["domain.width"], cfg["domain.height"])
    raise ConfigError(f"unknown domain type {t!r}", "domain.type")


def check_fit(m, dom, cfg):
    """The metric must be defined on the closed domain."""
    if m is None or dom is None:
        return
    if dom.name == "rectangle":
        a, b = 0.5 * cfg["domain.width"], 0.5 * cfg["domain.height"]
        pts = np.array([[a, b], [-a, b], [a, -b], [-a, -b]]) + dom.center
    else:
        from .domains import boundary_quadrature
        pts = boundary_quadrature(dom, 64).points
    y = np.zeros_like(pts)
    y[:, 0] = 1.0
    try:
        F = mc.eval_F(m, pts, y)
    except InvalidInputError as exc:
        F, msg = None, str(exc)
    if F is None or not np.all(np.isfinite(F)):
        key = {"ball": "domain.radius", "ellipse": "domain.a"}.get(dom.name, "domain.width")
        raise ConfigError(f"domain leaves the region where the metric is defined"
                          f"{f' ({msg})' if F is None else ''}", key)


def build_quadrature(cfg):
    return Quadrature(cfg["quadrature.boundary"], cfg["quadrature.hemisphere"], cfg["flow.dt"],
                      cfg["quadrature.radial"], cfg["quadrature.angular"], cfg["quadrature.indicatrix"],
                      cfg["flow.t_max"])


# ---------------------------------------------------------------------------
# commands: each returns (passed, payload, csv rows)
# ---------------------------------------------------------------------------

def cmd_verify_santalo(cfg, m, dom):
    q = build_quadrature(cfg)
    results, rows = [], []
    for name in cfg["santalo.integrands"]:
        params = {}
        if name == "bump":
            params = {"center": tuple(cfg["santalo.bump.center"]), "width": cfg["santalo.bump.width"],
                      "tilt": cfg["santalo.bump.tilt"]}
        try:
            f = builtin_integrand(name, **params)
        except InvalidInputError as exc:
            raise ConfigError(str(exc), "santalo.integrands") from None
        for rep in verify(m, cfg["measure"], dom, f, cfg["santalo.tol"], q, cfg["workers"],
                          backend=cfg["flow.backend"]):
            d = rep.to_dict()
            d["integrand"] = f.describe()
            results.append(d)
            rows.append({"integrand": name, "formula": rep.formula, "lhs": rep.lhs, "rhs": rep.rhs,
                         "abs_err": rep.abs_err, "rel_err": rep.rel_err, "tol": rep.tol,
                         "passed": rep.passed})
    return all(r["passed"] for r in rows), {"reports": results}, rows


def cmd_funk_report(cfg, m=None, dom=None):
    tol = {"mu": cfg["funk.tol.mu"], "A_plus": cfg["funk.tol.area"], "A_minus": cfg["funk.tol.area"],
           "Lambda": cfg["funk.tol.lambda"], "diam": cfg["funk.tol.diam"], "omega": cfg["funk.tol.omega"]}
    rows = bd.funk_report(cfg["funk.r"], cfg["measure"], 2, tol)
    return all(r["passed"] for r in rows), {"r": cfg["funk.r"], "rows": rows}, rows


def cmd_eigenvalue(cfg, m, dom):
    kind = cfg["measure"]
    res = minimize(m, kind, dom, cfg["eigen.resolution"], cfg["eigen.iters"])
    Lam, _ = bd.measure_uniformity(m, dom)
    D = bd.measure_diameter(m, dom)
    bound = bd.thm12_bound(m.dim, D, Lam, kind)
    checks = [bd.BoundsReport.make("thm12", res.eigenvalue, bound,
                                   {"diam": D, "Lambda": Lam, "hemisphere_eigenvalue":
                                    hemisphere_eigenvalue(m.dim, D)}, strict=True).to_dict()]
    if cfg["metric.family"] == "euclidean" and dom.name == "ball" and m.dim == 2:
        oracle = disk_eigenvalue(2, dom.params["radius"])
        rel = (res.eigenvalue - oracle) / oracle
        checks.append({"id": "disk_oracle", "lhs": res.eigenvalue, "rhs": oracle, "rel_err": rel,
                       "tolerance": cfg["eigen.oracle_tol"],
                       "satisfied": bool(0 <= rel <= cfg["eigen.oracle_tol"]),
                       "note": "discrete value must lie above the shooting oracle"})
    rows = [{"id": c["id"], "lhs": c["lhs"], "rhs": c["rhs"], "satisfied": c["satisfied"]} for c in checks]
    payload = {"eigen": res.to_dict(), "checks": checks}
    return all(c["satisfied"] for c in checks), payload, rows


def _random_points(dom, count, rng):
    R = dom.extent
    out = np.empty((0, 2))
    while len(out) < count:
        P = dom.center + rng.uniform(-R, R, (4 * count, 2))
        out = np.concatenate([out, P[dom.h(P) < -1e-9]])
    return out[:count]


def cmd_bounds(cfg, m, dom):
    kind = cfg["measure"]
    if m.dim != 2:
        raise ConfigError("the bounds suite is planar", "metric.dim")
    rng = np.random.default_rng(cfg["bounds.seed"])
    reps = []
    th = 2 * np.pi * np.arange(cfg["bounds.boundary_points"]) / cfg["bounds.boundary_points"]
    dirs = np.stack([np.cos(th), np.sin(th)], -1)
    xb = dom.center + dom.boundary_radius(dirs)[:, None] * dirs
    if dom.name != "ball":
        xb = dom.project_to_boundary(xb)
    for sign in "+-":
        reps.append(bd.lemma51_check(m, kind, dom, xb, sign))
    X = _random_points(dom, cfg["bounds.samples"], rng)
    reps.append(bd.prop42_check(m, X, rng.standard_normal(X.shape)))
    N = cfg["bounds.distortion_samples"]
    X = _random_points(dom, N, rng)
    b = rng.uniform(0, 2 * np.pi, N)
    W = np.stack([np.cos(b), np.sin(b)], -1)
    et, Lam = bd.lemma21_values(m, kind, X, W / m.F(X, W)[:, None])
    slack = 1 + 1e-12
    reps.append(bd.BoundsReport.make("lemma21.upper", float(np.min(Lam ** 2 * slack - et)), 0.0,
                                     {"samples": N}, note="min over samples of Lambda^n - e^tau"))
    reps.append(bd.BoundsReport.make("lemma21.lower", float(np.min(et * slack - Lam ** -2.0)), 0.0,
                                     {"samples": N}, note="min over samples of e^tau - Lambda^-n"))
    reps.extend(bd.thm13_check(m, kind, dom))
    for r in cfg["bounds.ball_radii"]:
        reps.extend(bd.forward_ball_check(m, kind, dom.center, r))
    tor = mc.Randers.constant(np.eye(2), cfg["bounds.cor55.b"])
    reps.append(bd.cor55_torus_check(tor, kind, cfg["bounds.cor55.resolution"]))
    dicts = [r.to_dict() for r in reps]
    rows = [{"id": r.id, "lhs": r.lhs, "rhs": r.rhs, "margin": r.margin, "satisfied": r.satisfied}
            for r in reps]
    return all(r.satisfied for r in reps), {"reports": dicts}, rows


def cmd_constants(cfg, m, dom=None):
    if cfg["metric.family"] not in ("euclidean", "randers") or m.dim != 2:
        raise ConfigError("constants needs a constant planar norm (euclidean or randers)", "metric.family")
    kind = cfg["measure"]
    splits = [bd.Splitting(*s) for s in cfg["constants.splits"]]
    try:
        cands = bd.constants_candidates(m, kind, splits, tuple(cfg["constants.eps"]), rtol=cfg["constants.rtol"])
    except InvalidInputError as exc:
        raise ConfigError(str(exc), "constants.splits") from None
    cor55 = bd.cor55_torus_check(m, kind, cfg["constants.resolution"])
    rows = [{"offset": c["split"]["offset"], "amplitude": c["split"]["amplitude"], "gap": c["split"]["gap"],
             "A_plus": c["A_plus"], "A_minus": c["A_minus"], "mu_M1": c["mu_M1"], "mu_M2": c["mu_M2"],
             "cheeger_candidate": c["cheeger_candidate"], "isoperimetric_candidate": c["isoperimetric_candidate"],
             "energy_limit_plus": c["energy_limit_plus"], "energy_limit_minus": c["energy_limit_minus"],
             "passed": c["passed"]} for c in cands]
    ok = all(c["passed"] for c in cands) and cor55.satisfied
    return ok, {"candidates": cands, "cor55": cor55.to_dict()}, rows


RUNNERS = {"verify-santalo": cmd_verify_santalo, "funk-report": cmd_funk_report,
           "eigenvalue": cmd_eigenvalue, "bounds": cmd_bounds, "constants": cmd_constants}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable, allow_nan=True) + "\n"


def write_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if not rows:
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _jsonable(v) if isinstance(v, (np.generic, np.ndarray)) else v for k, v in r.items()})


def _print_rows(rows, stream):
    for r in rows:
        stream.write("  ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in r.items()))
        stream.write("\n")


def _config_error(exc):
    key = getattr(exc, "key", None)
    sys.stderr.write(f"config error{f' [{key}]' if key else ''}: {exc}\n")


def run(command, config_path=None, out_dir=".", workers=None, tol=None, raw=None, stream=None):
    """Execute one command; returns the exit code."""
    stream = stream or sys.stdout
    t0 = time.perf_counter()
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    try:
        if raw is None:
            raw = load_config(config_path)
        overrides = {}
        if workers is not None:
            overrides["workers"] = str(workers)
        if tol is not None:
            for key in TOL_KEY[command]:
                overrides[key] = str(tol)
        cfg = resolve_config(raw, command, overrides)
        m = build_metric(cfg) if cfg["metric.family"] is not None else None
        dom = build_domain(cfg) if command in ("verify-santalo", "eigenvalue", "bounds") else None
        check_fit(m, dom, cfg)
    except ConfigError as exc:
        _config_error(exc)
        return 2
    except (InvalidInputError, InvalidDomainError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2

    try:
        passed, payload, rows = RUNNERS[command](cfg, m, dom)
    except ConfigError as exc:
        _config_error(exc)
        return 2
    except FinslerError as exc:
        where = os.path.basename(traceback.extract_tb(exc.__traceback__)[-1].filename)
        sys.stderr.write(f"numerical failure ({type(exc).__name__} in {where}): {exc}\n")
        return 3

    os.makedirs(out_dir, exist_ok=True)
    report = {"schema_version": SCHEMA_VERSION, "command": command, "config": cfg,
              "passed": bool(passed), "results": payload}
    with open(os.path.join(out_dir, f"{command}.json"), "w", encoding="utf-8") as fh:
        fh.write(dumps(report))
    write_csv(os.path.join(out_dir, f"{command}.csv"), rows)
    meta = {"schema_version": SCHEMA_VERSION, "command": command, "started": started,
            "runtime_seconds": time.perf_counter() - t0, "package_version": __version__,
            "python": platform.python_version(), "numpy": np.__version__, "numba_kernels": numba_enabled()}
    with open(os.path.join(out_dir, f"{command}.meta.json"), "w", encoding="utf-8") as fh:
        fh.write(dumps(meta))
    _print_rows(rows, stream)
    stream.write(f"{command}: {'PASS' if passed else 'FAIL'}\n")
    return 0 if passed else 1


def make_parser():
    p = argparse.ArgumentParser(prog="finsler-santalo",
                                description="Santalo-formula verification and Finsler eigenvalue bounds.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    helps = {"verify-santalo": "LHS versus both boundary formulas for each configured integrand",
             "funk-report": "measured Funk-disk quantities next to their closed forms",
             "eigenvalue": "first Dirichlet eigenvalue and its lower bound",
             "bounds": "suite of pointwise and isoperimetric inequalities",
             "constants": "Cheeger/isoperimetric/Sobolev candidates on the flat torus"}
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("--config", help="config file, or the name of a bundled config "
                        f"({', '.join(bundled_configs())})")
        sp.add_argument("--out", default=".", help="output directory (default: current)")
        sp.add_argument("--workers", type=int, help="worker threads (overrides 'workers')")
        sp.add_argument("--tol", type=float, help="override the command's tolerance")
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    return run(args.command, args.config, args.out, args.workers, args.tol)


if __name__ == "__main__":
    sys.exit(main())
