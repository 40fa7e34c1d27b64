"""gn-verify: config-driven runs of the inequality checks and the ODE estimates.

Config grammar (INI style via configparser; '#' starts a comment):

    [settings]              tol_rel, tol_abs, jobs
    [matrix NAME]           functions, weights, p, regime, anchor, defect, abs_f, window,
                            constant (overrides (p-1)^{p/2})
                            (functions/weights are ';'-separated tags, p is ','-separated;
                             the case list is their product)
    [windowed NAME]         function, weight, p, r, R, anchor
    [counterexample]        cases = p:theta, ...   sup_thetas = theta, ...
    [manufactured NAME]     function, tau, q, window, c, perturb, checks
    [model NAME]            model, params, t0, y0, yp0, t1, q

Tags look like 'power:theta=0.3' or 'poly_bump:k=2'; 'samples:PATH' loads a
two-column function sample file. Exit codes: 0 clean, 2 when any case is violated
or a certification check fails, 1 on configuration errors.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import eig
from .funcspace import FuncSpaceError, Interval, build_family, load_samples
from .ineq import (REGIMES, ROW_FIELDS, IneqError, InequalitySpec, counterexample_run,
                   verdict_row, verdict_tree, verify, verify_windowed)
from .weights import WeightError, make_primitive, registry

ODE_FIELDS = ("problem", "kind", "tau", "q", "check", "measured", "bound", "passed",
              "certified")
TRANSFORM_FIELDS_WEIGHT = ("lambda", "h", "H", "T", "G_h")
TRANSFORM_FIELDS_TAU = ("lambda", "k", "K", "h", "H", "G")
CONFIG_DIR = Path(__file__).with_name("configs")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- tags

def parse_tag(spec: str) -> tuple:
    name, _, rest = spec.strip().partition(":")
    params: dict = {}
    if name.strip() == "samples":
        return "samples", {"path": rest.strip()}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        k, eq, v = item.partition("=")
        if not eq:
            raise ValueError(f"expected key=value in {spec!r}")
        try:
            params[k.strip()] = float(v)
        except ValueError:
            params[k.strip()] = v.strip()
    return name.strip(), params


def build_function(spec: str):
    name, params = parse_tag(spec)
    if name == "samples":
        return load_samples(params["path"])
    return build_family(name, **params)


def build_weight(spec: str, p: float):
    name, params = parse_tag(spec)
    if name == "power" and "p" not in params:
        params["p"] = p
    return registry(name, **params)


def parse_anchor(text: str):
    text = text.strip()
    if text.startswith("point:"):
        _, lam0, c = text.split(":")
        return ("point_anchored", float(lam0), float(c))
    if text in ("closed_form", "zero_anchored"):
        return text
    raise ValueError(f"unknown anchor {text!r}")


def _floats(text: str) -> list:
    return [float(s) for s in text.replace(";", ",").split(",") if s.strip()]


def _tags(text: str) -> list:
    return [s.strip() for s in text.split(";") if s.strip()]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# ---------------------------------------------------------------- config

@dataclass
class CampaignConfig:
    path: Optional[Path]
    settings: dict = field(default_factory=dict)
    cases: list = field(default_factory=list)          # matrix and windowed jobs
    counterexample: Optional[dict] = None
    manufactured: list = field(default_factory=list)
    models: list = field(default_factory=list)


def _line_of(text: str, section: str, key: Optional[str] = None) -> int:
    lines = text.splitlines()
    start = 0
    for i, ln in enumerate(lines):
        if ln.strip() == f"[{section}]":
            start = i
            if key is None:
                return i + 1
            break
    for i in range(start + 1, len(lines)):
        s = lines[i].strip()
        if s.startswith("["):
            break
        if re.match(rf"{re.escape(key)}\s*=", s):
            return i + 1
    return start + 1


def load_config(path) -> CampaignConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: {e}") from e
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from e
    cfg = CampaignConfig(path)

    def fail(section, key, msg):
        raise ConfigError(f"{path}:{_line_of(text, section, key)}: [{section}] "
                          f"{key or ''}: {msg}")

    def get(section, key, default=None, required=False):
        if cp.has_option(section, key):
            return cp.get(section, key)
        if required:
            fail(section, None, f"missing key {key!r}")
        return default

    for section in cp.sections():
        kind, _, name = section.partition(" ")
        name = name.strip() or kind
        try:
            if kind == "settings":
                for k in ("tol_rel", "tol_abs"):
                    if cp.has_option(section, k):
                        cfg.settings[k] = float(cp.get(section, k))
                if cp.has_option(section, "jobs"):
                    cfg.settings["jobs"] = int(cp.get(section, "jobs"))
            elif kind == "matrix":
                _matrix_section(cfg, section, name, get, fail)
            elif kind == "windowed":
                _windowed_section(cfg, section, name, get, fail)
            elif kind == "counterexample":
                cases = []
                for item in (get(section, "cases", "4:0.3, 4:0.5, 4:0.1")).split(","):
                    p, _, th = item.strip().partition(":")
                    cases.append((float(p), float(th)))
                cfg.counterexample = {"cases": tuple(cases),
                                      "sup_thetas": tuple(_floats(get(section, "sup_thetas",
                                                                      "0.3")))}
            elif kind == "manufactured":
                _manufactured_section(cfg, section, name, get, fail)
            elif kind == "model":
                _model_section(cfg, section, name, get, fail)
            else:
                fail(section, None, f"unknown section kind {kind!r}")
        except ConfigError:
            raise
        except (ValueError, FuncSpaceError, WeightError, IneqError, eig.EigError) as e:
            fail(section, None, str(e))
    return cfg


def _matrix_section(cfg, section, name, get, fail):
    functions = _tags(get(section, "functions", required=True))
    weights = _tags(get(section, "weights", required=True))
    ps = _floats(get(section, "p", required=True))
    regime = get(section, "regime", required=True).strip()
    if regime not in REGIMES:
        fail(section, "regime", f"unknown regime {regime!r}")
    anchor_text = get(section, "anchor", "closed_form")
    try:
        parse_anchor(anchor_text)
    except ValueError as e:
        fail(section, "anchor", str(e))
    defect = _bool(get(section, "defect", "false"))
    abs_f = _bool(get(section, "abs_f", "false"))
    window = get(section, "window")
    win = tuple(_floats(window)) if window else None
    constant = get(section, "constant")
    constant = float(constant) if constant else None
    for fs in functions:
        try:
            build_function(fs)
        except (ValueError, FuncSpaceError, OSError) as e:
            fail(section, "functions", str(e))
        for ws in weights:
            for p in ps:
                try:
                    build_weight(ws, p)
                except (ValueError, WeightError, TypeError) as e:
                    fail(section, "weights", str(e))
                cfg.cases.append(("matrix", name, fs, ws, p, regime, anchor_text, defect,
                                  abs_f, win, constant))


def _windowed_section(cfg, section, name, get, fail):
    fs = get(section, "function", required=True)
    ws = get(section, "weight", "unit")
    p = float(get(section, "p", "2"))
    r, R = float(get(section, "r", required=True)), float(get(section, "R", required=True))
    anchor = get(section, "anchor", "closed_form")
    try:
        build_function(fs)
        build_weight(ws, p)
        parse_anchor(anchor)
    except (ValueError, FuncSpaceError, WeightError, OSError) as e:
        fail(section, None, str(e))
    cfg.cases.append(("windowed", name, fs, ws, p, r, R, anchor))


def _manufactured_section(cfg, section, name, get, fail):
    fs = get(section, "function", required=True)
    tau = get(section, "tau", required=True)
    q = float(get(section, "q", "2"))
    eig.parse_tau_spec(tau)
    build_function(fs)
    window = get(section, "window")
    checks = [c.strip() for c in get(section, "checks", "identity,i,ii,iii,v").split(",")]
    known = {"identity", "i", "ii", "iii", "iv", "v", "homogeneous"}
    bad = [c for c in checks if c not in known]
    if bad:
        fail(section, "checks", f"unknown checks {bad}")
    cfg.manufactured.append({
        "name": name, "function": fs, "tau": tau, "q": q,
        "window": tuple(_floats(window)) if window else None,
        "c": float(get(section, "c")) if get(section, "c") else None,
        "perturb": float(get(section, "perturb", "0")), "checks": tuple(checks)})


def _model_section(cfg, section, name, get, fail):
    mname = get(section, "model", required=True).strip()
    params = parse_tag("x:" + get(section, "params", ""))[1]
    m = eig.model(mname, **params)
    t0, y0, yp0, t1 = m.ivp
    cfg.models.append({
        "name": name, "model": mname, "params": params,
        "t0": float(get(section, "t0", t0)), "y0": float(get(section, "y0", y0)),
        "yp0": float(get(section, "yp0", yp0)), "t1": float(get(section, "t1", t1)),
        "q": float(get(section, "q", "2"))})


# ---------------------------------------------------------------- workers

def run_case(job: tuple, tol_rel: float, tol_abs: float) -> tuple:
    if job[0] == "matrix":
        _, name, fs, ws, p, regime, anchor, defect, abs_f, win, constant = job
        f = build_function(fs)
        tw = make_primitive(build_weight(ws, p), parse_anchor(anchor), p)
        window = Interval(*win) if win else f.domain
        spec = InequalitySpec(tw, p, window, regime, use_abs_f=abs_f, with_defect=defect,
                              constant=constant, tol_rel=tol_rel, tol_abs=tol_abs)
        v = verify(f, spec)
    else:
        _, name, fs, ws, p, r, R, anchor = job
        f = build_function(fs)
        tw = make_primitive(build_weight(ws, p), parse_anchor(anchor), p)
        spec = InequalitySpec(tw, p, f.domain, "R3_general", tol_rel=tol_rel, tol_abs=tol_abs)
        v = verify_windowed(f, spec, r, R)
    tree = verdict_tree(v)
    tree["case"] = name
    return verdict_row(v), tree


def _run_case_star(args):
    return run_case(*args)


def run_jobs(jobs: list, tol_rel: float, tol_abs: float, workers: int) -> list:
    """Results in job order regardless of pool size."""
    args = [(j, tol_rel, tol_abs) for j in jobs]
    if workers <= 1 or len(jobs) <= 1:
        return [run_case(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run_case_star, args))


def counterexample_rows(spec: dict) -> tuple:
    rep = counterexample_run(spec["cases"], spec["sup_thetas"])
    rows, tree = [], {"cases": [], "lower_bound_min_margin": rep.lower_bound_min_margin,
                      "literal_bound_holds": rep.literal_bound_holds,
                      "sup_diagnostic": rep.sup_diagnostic}
    for c in rep.cases:
        rate = c.lhs.verdict.rate_exponent
        rows.append({
            "function": "sine_bump", "weight": f"power(theta={c.theta:g})", "anchor": "",
            "p": c.p, "regime": "counterexample", "window_a": -1.0, "window_b": 1.0,
            "lhs": c.lhs.value, "lhs_err": c.lhs.error, "lhs_kind": c.lhs.verdict.kind,
            "lhs_rate": rate if rate is not None else math.nan,
            "rhs": c.rhs.value, "rhs_err": c.rhs.error, "rhs_kind": c.rhs.verdict.kind,
            "constant": c.constant, "defect": 0.0, "slack": math.nan,
            "tolerance": math.nan, "member": "no",
            "sufficient_condition": f"expected lhs {c.expected_lhs}, rhs {c.expected_rhs}",
            "pass": c.passed})
        tree["cases"].append({"p": c.p, "theta": c.theta, "checks": c.checks,
                              "rate_target": c.rate_target, "pass": c.passed,
                              "lhs_schedule": [list(t) for t in c.lhs.schedule],
                              "rhs_schedule": [list(t) for t in c.rhs.schedule]})
    return rows, tree, rep.ok


# ---------------------------------------------------------------- ode

def _ode_rows(name: str, kind: str, tau: str, q: float, checks: list) -> list:
    return [{"problem": name, "kind": kind, "tau": tau, "q": q, "check": c,
             "measured": m, "bound": b, "passed": ok, "certified": cert}
            for c, m, b, ok, cert in checks]


def run_manufactured(item: dict, tol_rel: float) -> tuple:
    f = build_function(item["function"])
    tau = eig.parse_tau_spec(item["tau"])
    q = item["q"]
    window = Interval(*item["window"]) if item["window"] else f.domain
    dt = eig.derive_transforms(tau, q)
    g = eig.manufacture(f, tau, window)
    if item["perturb"]:
        g = eig.perturbed(g, item["perturb"])
    prob = eig.EigenProblem(tau, q, g, window, f)
    todo = item["checks"]
    out, notes = [], []
    if "identity" in todo:
        r = eig.identity_residual(prob, dt)
        out.append(("identity", r, 1e-10, r < 1e-10, True))
    bc = eig.boundary_flux(prob, dt)
    cert = bool(bc["certified"] and bc["value"] <= 1e-9)
    if not cert:
        notes.append(f"boundary condition not certified ({bc['value']:.6g})")
    if "i" in todo:
        ei = eig.estimate_i(prob, dt, tol_rel)
        out.append(("i", ei["lhs"], ei["bound"], ei["passes"], cert))
    if "ii" in todo:
        hc = eig.holder_check(prob, dt.G, tol=tol_rel)
        out.append(("ii", hc["seminorm"], hc["bound"], hc["passes"], cert))
    for tag, endpoint in (("iii", None), ("iv", "a")):
        if tag in todo:
            try:
                pb = eig.pointwise_bound(prob, dt, item["c"], endpoint=endpoint)
                out.append((tag, pb["max_violation"], 0.0, pb["passes"], cert))
            except eig.EigError as e:
                notes.append(f"{tag}: {e}")
    if "v" in todo:
        try:
            wb = eig.w2q_bound(prob, dt, item["c"], tol=tol_rel)
            out.append(("v", wb["lhs"], wb["bound"], wb["passes"], cert))
        except eig.EigError as e:
            notes.append(f"v: {e}")
    if "homogeneous" in todo and tau.family_tag == "power":
        rep = eig.homogeneous_suite(q, tau.alpha, prob, tol_rel)
        out.append(("hom_i", rep.lhs_i, rep.rhs_i, rep.checks["i"], cert))
        out.append(("hom_ii", rep.holder_seminorm, rep.holder_bound, rep.checks["ii"], cert))
        if "iii" in rep.checks:
            out.append(("hom_iii", rep.pointwise_max_violation, 0.0, rep.checks["iii"], cert))
    rows = _ode_rows(item["name"], "manufactured", tau.label, q, out)
    table = transform_table_tau(dt)
    return rows, {"problem": item["name"], "notes": notes, "boundary": bc}, table, None


def run_model(item: dict, tol_rel: float) -> tuple:
    m = eig.model(item["model"], **item["params"])
    notes = [m.note] if m.note else []
    sol = None
    try:
        f = eig.integrate_ivp(m.tau, m.g, item["t0"], item["y0"], item["yp0"], item["t1"])
    except eig.EigError as e:
        if e.partial is None:
            raise
        f = e.partial
        notes.append(str(e))
    ts = np.linspace(f.domain.a, f.domain.b, 401)
    y, yp, ypp = f.jet(ts)
    sol = np.column_stack([ts, y, yp, ypp])
    q = item["q"]
    out = []
    prob = eig.EigenProblem(m.tau, q, m.g, f.domain, f)
    try:
        dt = eig.derive_transforms(m.tau, q)
        r = eig.identity_residual(prob, dt)
        out.append(("identity", r, 1e-10, r < 1e-10, True))
        ei = eig.estimate_i(prob, dt, tol_rel)
        out.append(("i", ei["lhs"], ei["bound"], ei["passes"], False))
        hc = eig.holder_check(prob, dt.G, tol=tol_rel)
        out.append(("ii", hc["seminorm"], hc["bound"], hc["passes"], False))
        table = transform_table_tau(dt)
    except eig.EigError as e:
        notes.append(str(e))
        table = None
    rows = _ode_rows(item["name"], "model", m.tau.label, q, out)
    return rows, {"problem": item["name"], "model": item["model"], "notes": notes}, table, sol


# ---------------------------------------------------------------- output

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.12e" % float(v)
    if isinstance(v, (int, np.integer)):
        return "%.12e" % float(v)
    return str(v)


def write_csv(path: Optional[Path], fields, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in fields])
    text = buf.getvalue()
    if path is not None:
        path.write_text(text)
    return text


def _json_safe(x):
    if isinstance(x, float) or isinstance(x, np.floating):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_json_safe(obj), indent=2) + "\n")


def transform_table_weight(tw, p: float, lam: Optional[np.ndarray] = None) -> list:
    lam = np.geomspace(1e-3, 1e3, 61) if lam is None else lam
    return [{"lambda": x, "h": float(tw.h(x)), "H": float(tw.Hv(x)), "T": float(tw.T(x)),
             "G_h": float(tw.G(x, p))} for x in lam]


def transform_table_tau(dt, lam: Optional[np.ndarray] = None) -> list:
    lam = np.geomspace(1e-3, 1e3, 61) if lam is None else lam
    rows = []
    for x in lam:
        a = np.array([x])
        rows.append({"lambda": x,
                     "k": float(dt.k(a)[0]) if dt.k is not None else math.nan,
                     "K": float(dt.K(a)[0]) if dt.K is not None else math.nan,
                     "h": float(np.asarray(dt.h(a))[0]), "H": float(np.asarray(dt.H(a))[0]),
                     "G": float(np.asarray(dt.G(a))[0])})
    return rows


# ---------------------------------------------------------------- commands

def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _tolerances(args, cfg: Optional[CampaignConfig]) -> tuple:
    s = cfg.settings if cfg else {}
    tol_rel = args.tol_rel if args.tol_rel is not None else s.get("tol_rel", 1e-6)
    tol_abs = args.tol_abs if args.tol_abs is not None else s.get("tol_abs", 0.0)
    return tol_rel, tol_abs


def _jobs(args, cfg: Optional[CampaignConfig]) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    if cfg and "jobs" in cfg.settings:
        return max(1, cfg.settings["jobs"])
    return os.cpu_count() or 1


def resolve_config(path: str) -> Path:
    p = Path(path)
    if not p.exists() and (CONFIG_DIR / path).exists():
        return CONFIG_DIR / path
    return p


def cmd_transforms(args) -> int:
    if bool(args.weight) == bool(args.tau):
        raise ConfigError("give exactly one of --weight or --tau")
    if args.weight:
        name, params = parse_tag(args.weight)
        p = args.p if args.p is not None else float(params.get("p", 2.0))
        tw = make_primitive(build_weight(args.weight, p), parse_anchor(args.anchor), p)
        rows, fields = transform_table_weight(tw, p), TRANSFORM_FIELDS_WEIGHT
    else:
        dt = eig.derive_transforms(eig.parse_tau_spec(args.tau), args.q)
        rows, fields = transform_table_tau(dt), TRANSFORM_FIELDS_TAU
    path = _out_dir(args) / "transforms.csv" if args.out else None
    sys.stdout.write(write_csv(path, fields, rows))
    return 0


def _summary(rows: list) -> dict:
    out = {"holds": 0, "violated": 0, "inconclusive": 0}
    for r in rows:
        out[r["pass"]] = out.get(r["pass"], 0) + 1
    return out


def cmd_verify(args, only_counterexample: bool = False) -> int:
    cfg = load_config(resolve_config(args.config)) if args.config else CampaignConfig(None)
    if only_counterexample and cfg.counterexample is None:
        cfg.counterexample = {"cases": ((4.0, 0.3), (4.0, 0.5), (4.0, 0.1)),
                              "sup_thetas": (0.3,)}
    tol_rel, tol_abs = _tolerances(args, cfg)
    jobs = [] if only_counterexample else cfg.cases
    results = run_jobs(jobs, tol_rel, tol_abs, _jobs(args, cfg))
    rows = [r for r, _ in results]
    trees = [t for _, t in results]
    ce_ok = True
    report = {"cases": trees}
    if cfg.counterexample is not None:
        crows, ctree, ce_ok = counterexample_rows(cfg.counterexample)
        rows += crows
        report["counterexample"] = ctree
    summary = _summary(rows)
    summary["counterexample_expectations_met"] = ce_ok
    report["summary"] = summary
    out = _out_dir(args)
    stem = "counterexample" if only_counterexample else "verify"
    write_csv(out / f"{stem}.csv", ROW_FIELDS, rows)
    write_json(out / f"{stem}.json", report)
    print(f"{len(rows)} cases: {summary['holds']} holds, {summary['violated']} violated, "
          f"{summary['inconclusive']} inconclusive"
          + ("" if ce_ok else "; counterexample expectations not met"))
    return 2 if summary["violated"] or not ce_ok else 0


def cmd_ode(args) -> int:
    if args.model:
        params = parse_tag("x:" + (args.param or ""))[1]
        m = eig.model(args.model, **params)
        t0, y0, yp0, t1 = m.ivp
        pick = lambda v, d: d if v is None else v  # noqa: E731
        cfg = CampaignConfig(None, models=[{
            "name": args.model, "model": args.model, "params": params,
            "t0": pick(args.t0, t0), "y0": pick(args.y0, y0), "yp0": pick(args.yp0, yp0),
            "t1": pick(args.t1, t1), "q": args.q}])
    elif args.config:
        cfg = load_config(resolve_config(args.config))
    else:
        raise ConfigError("ode needs --config or --model")
    tol_rel, _ = _tolerances(args, cfg)
    out = _out_dir(args)
    rows, report = [], {"problems": []}
    runs = [(run_manufactured, it) for it in cfg.manufactured] + \
           [(run_model, it) for it in cfg.models]
    for fn, item in runs:
        r, info, table, sol = fn(item, tol_rel)
        rows += r
        report["problems"].append({"info": info, "rows": r})
        if table is not None:
            write_csv(out / f"ode_{item['name']}_transforms.csv", TRANSFORM_FIELDS_TAU, table)
        if sol is not None:
            write_csv(out / f"ode_{item['name']}_solution.csv", ("t", "y", "yp", "ypp"),
                      [dict(zip(("t", "y", "yp", "ypp"), row)) for row in sol])
    write_csv(out / "ode.csv", ODE_FIELDS, rows)
    failed = [r for r in rows if r["certified"] and not r["passed"]]
    report["summary"] = {"checks": len(rows), "failed_certified": len(failed),
                         "heuristic": sum(1 for r in rows if not r["certified"])}
    write_json(out / "ode.json", report)
    print(f"{len(rows)} checks, {len(failed)} certified failures")
    return 2 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gn-verify", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="campaign config (path or bundled name)")
    common.add_argument("--out", default="gn_verify_out", help="output directory")
    common.add_argument("--jobs", type=int, default=None, help="worker processes")
    common.add_argument("--tol-rel", type=float, default=None, dest="tol_rel")
    common.add_argument("--tol-abs", type=float, default=None, dest="tol_abs")
    sub = ap.add_subparsers(dest="command", required=True)
    t = sub.add_parser("transforms", parents=[common], help="tabulate h, H, T, G")
    t.add_argument("--weight")
    t.add_argument("--anchor", default="closed_form")
    t.add_argument("--p", type=float, default=None)
    t.add_argument("--tau")
    t.add_argument("--q", type=float, default=2.0)
    t.set_defaults(out=None)
    sub.add_parser("verify", parents=[common], help="run an inequality campaign")
    sub.add_parser("counterexample", parents=[common], help="divergence certification run")
    o = sub.add_parser("ode", parents=[common], help="a priori estimates for f'' = g tau(f)")
    o.add_argument("--model", choices=eig.MODEL_NAMES)
    o.add_argument("--param", help="model parameters, k=v,...")
    o.add_argument("--t0", type=float)
    o.add_argument("--y0", type=float)
    o.add_argument("--yp0", type=float)
    o.add_argument("--t1", type=float)
    o.add_argument("--q", type=float, default=2.0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "transforms":
            return cmd_transforms(args)
        if args.command == "verify":
            if not args.config:
                raise ConfigError("verify needs --config")
            return cmd_verify(args)
        if args.command == "counterexample":
            return cmd_verify(args, only_counterexample=True)
        return cmd_ode(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except (FuncSpaceError, WeightError, IneqError, eig.EigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
