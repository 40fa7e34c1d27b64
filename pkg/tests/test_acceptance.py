"""Acceptance criteria, one PASS/FAIL line each.

Run with pytest (lines are printed even under capture) or directly:
    python3 tests/test_acceptance.py
"""

import csv
import io
import json
import math
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from gnverify import eig
from gnverify.cli import main as cli_main
from gnverify.funcspace import Interval, build_family, dilate, rescale
from gnverify.ineq import (InequalitySpec, counterexample_run, specialize_power, verify)
from gnverify.weights import make_primitive, registry

FROZEN = json.loads((Path(__file__).with_name("frozen.json")).read_text())
R = Interval(-math.inf, math.inf)

# tolerances pinned by the criteria
TRANSFORM_CLOSED_RTOL = 1e-12
TRANSFORM_NUMERIC_RTOL = 1e-8
FD_RTOL = 1e-6
FIXTURE_ABS = 1e-9
MATRIX_TOL_REL = 1e-6
INVARIANCE_RTOL = 1e-8
RATE_FRAC = 0.10
IDENTITY_MAX = 1e-10
PERTURBED_MIN = 1e-2
RATIO_I_MAX = 1 + 1e-6
CONST_ABS = 1e-12
ODE_ABS = 1e-8


def _rel(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    nz = b != 0
    return float(np.max(np.abs(a - b)[nz] / np.abs(b[nz]))) if np.any(nz) else 0.0


def _fd(H, h, lam):
    step = 1e-5 * np.maximum(np.abs(lam), 1e-2)
    d = (np.asarray(H(lam + step), float) - np.asarray(H(lam - step), float)) / (2 * step)
    return _rel(d, h(lam))


def criterion_1():
    t0 = time.perf_counter()
    worst_closed = worst_numeric = worst_fd = 0.0
    weights = [("unit", {}), ("power", {"theta": 0.5, "p": 4}), ("power", {"theta": 0.3, "p": 2}),
               ("power", {"theta": -1.0, "p": 4}), ("log_reciprocal", {}),
               ("exponential", {"alpha": 1.0, "beta": 1.0}),
               ("exponential", {"alpha": 1.0, "beta": 2.0}),
               ("exponential", {"alpha": 1.0, "beta": 2.0, "shifted": True})]
    for name, params in weights:
        w = registry(name, **params)
        lam = np.geomspace(1e-3, 4.0, 81) if w.domain.a == 0.0 else np.linspace(-3, 3, 81)
        tw = make_primitive(w)
        worst_closed = max(worst_closed, _rel(tw.T(lam) * tw.h(lam), tw.Hv(lam)))
        worst_fd = max(worst_fd, _fd(tw.Hv, tw.h, lam))
        if w.domain.a == 0.0 and w.H_zero_limit is not None:
            bare = registry("custom", h=w.h, domain=w.domain)
            num = make_primitive(bare, "zero_anchored")
            worst_numeric = max(worst_numeric, _rel(num.T(lam) * num.h(lam), num.Hv(lam)))
            worst_fd = max(worst_fd, _fd(num.Hv, num.h, lam))
    for alpha in (-0.5, 0.5, 1.0, 1.5, 2.0):
        for q in (1.0, 1.5, 2.0, 3.0):
            if q > 1 and abs(q - 1 + alpha * q) < 1e-12:
                continue
            for closed in (True, False):
                dt = eig.derive_transforms(eig.power_tau(alpha), q, closed=closed)
                r = eig.transform_identity(dt)
                if closed:
                    worst_closed = max(worst_closed, r)
                else:
                    worst_numeric = max(worst_numeric, r)
                worst_fd = max(worst_fd, max(eig.derivative_checks(dt).values()))
    dt_s = time.perf_counter() - t0
    ok = (worst_closed < TRANSFORM_CLOSED_RTOL and worst_numeric < TRANSFORM_NUMERIC_RTOL
          and worst_fd < FD_RTOL and dt_s < 10)
    return ok, (f"closed {worst_closed:.1e}, numeric {worst_numeric:.1e}, fd {worst_fd:.1e}, "
                f"{dt_s:.1f}s")


def criterion_2():
    t0 = time.perf_counter()
    v = verify(build_family("poly_bump", k=2),
               InequalitySpec(make_primitive(registry("unit")), 2.0, R, "R3_real_line"))
    dt_s = time.perf_counter() - t0
    el = abs(v.lhs.value - 256 / 105)
    er = abs(v.rhs.value - (2944 / (315 * math.sqrt(3)) - 256 / 105))
    ok = el <= FIXTURE_ABS and er <= FIXTURE_ABS and v.passed == "holds" and v.constant == 1.0 \
        and dt_s < 1
    return ok, f"|lhs err| {el:.1e}, |rhs err| {er:.1e}, {v.passed}, {dt_s:.2f}s"


def criterion_3():
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as d:
        code = cli_main(["verify", "--config", "paper_suite.cfg", "--jobs", "1", "--out", d,
                         "--tol-rel", str(MATRIX_TOL_REL)])
        rows = list(csv.DictReader(io.StringIO((Path(d) / "verify.csv").read_text())))
    dt_s = time.perf_counter() - t0
    holds = sum(r["pass"] == "holds" for r in rows)
    violated = sum(r["pass"] == "violated" for r in rows)
    slack_ok = all(float(r["slack"]) >= -float(r["tolerance"]) for r in rows)
    ok = code == 0 and len(rows) >= 60 and holds == len(rows) and violated == 0 and slack_ok \
        and dt_s < 300
    return ok, f"{holds}/{len(rows)} holds, {violated} violated, {dt_s:.1f}s"


def criterion_4():
    unit = make_primitive(registry("unit"))
    worst = 0.0
    for fam, params in (("poly_bump", {"k": 2}), ("poly_bump", {"k": 3}), ("smooth_bump", {}),
                        ("sine_bump", {})):
        f = build_family(fam, **params)
        for p in (2.0, 3.0, 4.0):
            ratios = [verify(dilate(f, s), InequalitySpec(unit, p, R, "R3_real_line")).ratio
                      for s in (0.5, 1.0, 2.0, 4.0)]
            worst = max(worst, (max(ratios) - min(ratios)) / ratios[1])
    dil = worst
    worst = 0.0
    for f, theta, p, var in ((build_family("poly_bump", k=3), 0.3, 2.0, "case1"),
                             (build_family("poly_bump", k=2), -1.0, 4.0, "case1"),
                             (build_family("power_profile", m=2), 0.5, 4.0, "case2"),
                             (build_family("power_profile", m=3), 0.4, 4.0, "case2")):
        ratios = [specialize_power(rescale(f, c), theta, p, var).ratio for c in (0.5, 1.0, 3.0)]
        worst = max(worst, (max(ratios) - min(ratios)) / ratios[1])
    ok = dil <= INVARIANCE_RTOL and worst <= INVARIANCE_RTOL
    return ok, f"dilation spread {dil:.1e}, scale spread {worst:.1e}"


def criterion_5():
    t0 = time.perf_counter()
    rep = counterexample_run(((4.0, 0.3), (4.0, 0.5), (4.0, 0.1)), ())
    dt_s = time.perf_counter() - t0
    by = {c.theta: c for c in rep.cases}
    ok = dt_s < 30
    parts = []
    for th in (0.3, 0.5):
        c = by[th]
        target = th * 4 - 1
        rate = c.lhs.verdict.rate_exponent
        good = (c.lhs.verdict.kind == "divergent" and c.rhs.verdict.kind == "finite_limit"
                and rate is not None and abs(rate - target) <= RATE_FRAC * target)
        ok &= good
        parts.append(f"theta={th}: rate {rate:.3f} vs {target:.1f}")
    c = by[0.1]
    good = c.lhs.verdict.kind == c.rhs.verdict.kind == "finite_limit" and c.passed == "holds"
    ok &= good
    parts.append(f"theta=0.1: {c.passed}")
    return ok, "; ".join(parts) + f", {dt_s:.1f}s"


def _manufactured(profile, q, alpha, shift=0.0):
    f = build_family("manufactured", profile=profile)
    tau = eig.power_tau(alpha)
    g = eig.manufacture(f, tau)
    if shift:
        g = eig.perturbed(g, shift)
    return eig.EigenProblem(tau, q, g, f.domain, f), eig.derive_transforms(tau, q)


FIXTURES = [(pr, q, a) for pr in ("quadratic", "cosh", "exp")
            for q, a in ((2.0, 1.0), (2.0, 0.5), (1.0, 0.5))]


def criterion_6():
    worst = 0.0
    neg = math.inf
    for pr, q, a in FIXTURES:
        prob, dt = _manufactured(pr, q, a)
        worst = max(worst, eig.identity_residual(prob, dt))
        bad, _ = _manufactured(pr, q, a, 0.1)
        neg = min(neg, eig.identity_residual(bad, dt))
    ok = len(FIXTURES) >= 9 and worst < IDENTITY_MAX and neg > PERTURBED_MIN
    return ok, f"{len(FIXTURES)} fixtures, max residual {worst:.1e}, min perturbed {neg:.2e}"


def criterion_7():
    ratio = sem_margin = viol = -math.inf
    for pr, q, a in FIXTURES:
        prob, dt = _manufactured(pr, q, a)
        bc = eig.boundary_flux(prob, dt)
        if not (bc["certified"] and bc["value"] <= 1e-9):
            return False, f"{pr} ({q}, {a}) boundary condition not certified"
        ratio = max(ratio, eig.estimate_i(prob, dt)["ratio"])
        hc = eig.holder_check(prob, dt.G)
        sem_margin = max(sem_margin, hc["seminorm"] - hc["bound"])
        if a < 1.0:
            viol = max(viol, eig.pointwise_bound(prob, dt, 0.5)["max_violation"])
        wb = eig.w2q_bound(prob, dt, 0.5)
        viol = max(viol, wb["lhs"] - wb["bound"] * (1 + 1e-6))
    A = eig.homogeneous_constants(1.0, 2.0)["A_q"]
    const_err = abs(A - 2**-0.5 / 2)
    ok = ratio <= RATIO_I_MAX and sem_margin <= 0 and viol <= 1e-9 and const_err <= CONST_ABS
    return ok, (f"max ratio_i {ratio:.6f}, seminorm-bound {sem_margin:.2e}, "
                f"max violation {viol:.2e}, A_q(1,2) err {const_err:.1e}")


def criterion_8():
    one = eig.power_tau(1.0)
    ts = np.linspace(0.0, 2.0, 41)
    aff = eig.integrate_ivp(one, lambda t: np.zeros_like(np.asarray(t, float)), 0.0, 1.0, 0.5, 2.0)
    e_aff = float(np.max(np.abs(aff.value(ts) - (1 + 0.5 * ts))))
    ch = eig.integrate_ivp(one, lambda t: np.ones_like(np.asarray(t, float)), 0.0, 1.0, 0.0, 2.0)
    e_ch = float(np.max(np.abs(ch.value(ts) - np.cosh(ts))))
    m = eig.model("thomas_fermi")
    tf = eig.integrate_ivp(m.tau, m.g, *m.ivp)
    y, yp, _ = tf.jet(np.array([1.0]))
    ref = FROZEN["thomas_fermi_rk4_n4000"]
    e_tf = max(abs(y[0] - ref["y1"]), abs(yp[0] - ref["yp1"]))
    ok = max(e_aff, e_ch, e_tf) < ODE_ABS
    return ok, f"affine {e_aff:.1e}, cosh {e_ch:.1e}, Thomas-Fermi vs RK4 {e_tf:.1e}"


GOLDEN = [("verify", "paper_suite.cfg", 0), ("counterexample", "counterexample.cfg", 0),
          ("ode", "manufactured.cfg", 0), ("ode", "models.cfg", 0),
          ("ode", "perturbed.cfg", 2), ("verify", "negative_control.cfg", 2)]


def criterion_9():
    bad = []
    with tempfile.TemporaryDirectory() as d:
        for cmd, cfg, want in GOLDEN:
            outs = []
            for k in range(2):
                out = Path(d) / f"{cfg}-{k}"
                code = cli_main([cmd, "--config", cfg, "--out", str(out)])
                if code != want:
                    bad.append(f"{cfg} exit {code}")
                outs.append({p.name: p.read_bytes() for p in out.glob("*.csv")})
            if outs[0] != outs[1] or not outs[0]:
                bad.append(f"{cfg} not byte-identical")
        cfgp = Path(d) / "unknown.cfg"
        cfgp.write_text("[matrix m]\nfunctions = poly_bump:k=2\nweights = nosuch\np = 2\n"
                        "regime = R3_real_line\n")
        if cli_main(["verify", "--config", str(cfgp), "--out", d]) != 1:
            bad.append("unknown weight not exit 1")
    return not bad, "; ".join(bad) if bad else f"{len(GOLDEN)} configs x2 identical, 0/1/2 ok"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9]


def _line(i, fn):
    ok, detail = fn()
    return ok, f"criterion {i}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("i", range(1, len(CRITERIA) + 1))
def test_criterion(i, capsys):
    ok, line = _line(i, CRITERIA[i - 1])
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_line(i, fn) for i, fn in enumerate(CRITERIA, 1)]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)
