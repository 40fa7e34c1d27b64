"""Adaptive Gauss-Kronrod quadrature, improper endpoints, cutoff extrapolation over
{|f| > delta} with divergence certification, and heuristic boundary liminf/limsup."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .funcspace import (GRID_DIVISIONS, Interval, TestFunction, locate_zeros,
                        sampling_range)

DEFAULT_ABS_TOL = 1e-10
DEFAULT_REL_TOL = 1e-8
DEFAULT_MAX_EVALS = 1_000_000
FIT_POINTS = 6
R2_MIN = 0.99

# 15-point Kronrod abscissae on [-1, 1] (positive half) with Kronrod weights and the
# weights of the embedded 7-point Gauss rule (nodes at odd positions).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_W = np.zeros(15)
GAUSS_W[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


class QuadError(RuntimeError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass
class QuadratureResult:
    value: float
    error_estimate: float
    subdivisions: int
    status: str  # converged | max_subdivisions | divergent_suspected
    evaluations: int = 0
    abs_tol: float = DEFAULT_ABS_TOL
    rel_tol: float = DEFAULT_REL_TOL

    @property
    def converged(self) -> bool:
        return self.status == "converged"


@dataclass
class CutoffVerdict:
    kind: str  # finite_limit | divergent | inconclusive
    value: float = math.nan
    error: float = math.nan
    rate_exponent: float = math.nan
    fit_quality: float = math.nan
    note: str = ""


@dataclass
class CutoffReport:
    schedule: list
    verdict: CutoffVerdict
    restriction: str = "none"
    quad_error: float = 0.0
    statuses: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        return self.verdict.kind == "finite_limit"

    @property
    def value(self) -> float:
        return self.verdict.value

    @property
    def error(self) -> float:
        return self.verdict.error


@dataclass
class BoundaryEstimate:
    endpoint: str
    tail_inf: float
    tail_sup: float
    samples: list
    heuristic: bool = True


# ---------------------------------------------------------------- core rule

def gk15(g: Callable, a: float, b: float):
    """One Kronrod panel: (kronrod value, gauss value, integral of |g|)."""
    c, r = 0.5 * (a + b), 0.5 * (b - a)
    y = np.asarray(g(c + r * NODES), dtype=float)
    absval = abs(r) * float(KRONROD_W @ np.abs(y))
    return r * float(KRONROD_W @ y), r * float(GAUSS_W @ y), absval, y


def integrate(g: Callable, window: Interval, abs_tol: float = DEFAULT_ABS_TOL,
              rel_tol: float = DEFAULT_REL_TOL, knots: Sequence = (),
              max_evals: int = DEFAULT_MAX_EVALS) -> QuadratureResult:
    """Globally adaptive G7/K15 bisection over a finite window pre-split at knots."""
    if not window.is_finite:
        raise QuadError("INFINITE_WINDOW", "use integrate_improper for infinite endpoints")
    a, b = window.a, window.b
    pts = sorted({a, b, *(float(k) for k in knots if a < k < b)})
    heap: list = []
    evals = 0
    total = 0.0
    total_err = 0.0
    total_abs = 0.0
    serial = 0
    eps = np.finfo(float).eps

    def push(lo, hi):
        nonlocal evals, total, total_err, total_abs, serial
        k, gs, ab, y = gk15(g, lo, hi)
        evals += 15
        if not np.all(np.isfinite(y)):
            return False
        err = abs(k - gs)
        total += k
        total_err += err
        total_abs += ab
        serial += 1
        heapq.heappush(heap, (-err, serial, lo, hi, k, err, ab))
        return True

    def result(status):
        panels = sorted(heap, key=lambda t: t[2])
        val = math.fsum(p[4] for p in panels)
        err = math.fsum(p[5] for p in panels)
        return QuadratureResult(val, err, len(panels), status, evals, abs_tol, rel_tol)

    for lo, hi in zip(pts[:-1], pts[1:]):
        if not push(lo, hi):
            return QuadratureResult(math.inf, math.inf, len(heap), "divergent_suspected",
                                    evals, abs_tol, rel_tol)
    while True:
        target = max(abs_tol, rel_tol * abs(total), 100 * eps * total_abs)
        if total_err <= target:
            return result("converged")
        if evals + 30 > max_evals:
            return result("max_subdivisions")
        negerr, _, lo, hi, k, err, ab = heap[0]
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi) or err <= 50 * eps * ab:
            # panel cannot be refined further; accept it as is
            return result("max_subdivisions" if total_err > target else "converged")
        heapq.heappop(heap)
        total -= k
        total_err -= err
        total_abs -= ab
        if not (push(lo, mid) and push(mid, hi)):
            return QuadratureResult(math.inf, math.inf, len(heap), "divergent_suspected",
                                    evals, abs_tol, rel_tol)
        if len(heap) % 64 == 0:
            # resum to keep the running totals free of cancellation drift
            total = math.fsum(p[4] for p in heap)
            total_err = math.fsum(p[5] for p in heap)
            total_abs = math.fsum(p[6] for p in heap)


def _to_unit(u: float) -> float:
    """Inverse of x = t / (1 - t^2)."""
    return 2.0 * u / (1.0 + math.sqrt(1.0 + 4.0 * u * u))


def integrate_improper(g: Callable, window: Interval, abs_tol: float = DEFAULT_ABS_TOL,
                       rel_tol: float = DEFAULT_REL_TOL, knots: Sequence = (),
                       max_evals: int = DEFAULT_MAX_EVALS) -> QuadratureResult:
    """Integrate over a window with possibly infinite endpoints via x = t/(1 - t^2)."""
    if window.is_finite:
        return integrate(g, window, abs_tol, rel_tol, knots, max_evals)
    a, b = window.a, window.b
    if not window.finite_a and not window.finite_b:
        origin, tlo, thi = 0.0, -1.0, 1.0
    elif window.finite_a:
        origin, tlo, thi = a, 0.0, 1.0
    else:
        origin, tlo, thi = b, -1.0, 0.0

    def gt(t):
        t = np.asarray(t, dtype=float)
        d = 1.0 - t * t
        x = origin + t / d
        return np.asarray(g(x), dtype=float) * (1.0 + t * t) / (d * d)

    tk = [_to_unit(float(k) - origin) for k in knots if a < k < b]
    return integrate(gt, Interval(tlo, thi), abs_tol, rel_tol, tk, max_evals)


# ---------------------------------------------------------------- cutoff

def default_schedule(scale: float = 1.0) -> list:
    return [scale * 2.0**-k for k in range(4, 25)]


def _fit(xs: np.ndarray, ys: np.ndarray):
    """Least-squares slope and R^2 of ys against xs."""
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = ys - A @ coef
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot <= 1e-24 * max(1.0, float(np.sum(ys**2))) else 1.0 - ss_res / ss_tot
    return float(coef[0]), r2


def extrapolate_cutoff(deltas: Sequence, values: Sequence, errors: Sequence) -> CutoffVerdict:
    """Decide the delta -> 0 behaviour of V(delta) from its tail.

    The increments d_k = V_k - V_{k-1} of a power-law tail scale like delta_k^sigma,
    so a log-log fit of |d_k| against delta_k separates convergence (sigma > 0,
    Richardson extrapolation) from divergence (sigma <= 0, rate -sigma) without
    being disturbed by the unknown finite part of V.
    """
    deltas = np.asarray(deltas, dtype=float)
    values = np.asarray(values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    vK = float(values[-1])
    qerr = float(np.sum(errors))
    if values.size < FIT_POINTS + 1:
        return CutoffVerdict("finite_limit", vK, qerr, note="short schedule")
    inc = np.diff(values)[-FIT_POINTS:]
    inc_err = errors[-FIT_POINTS:]
    dl = deltas[-FIT_POINTS:]
    noise = 3.0 * inc_err + 1e-13 * abs(vK)
    if np.all(np.abs(inc) <= noise) or float(np.max(np.abs(inc))) <= 1e-15 * max(abs(vK), 1e-300):
        return CutoffVerdict("finite_limit", vK, qerr + float(np.sum(np.abs(inc[-1:]))),
                             note="tail increments below quadrature noise")
    same_sign = np.all(inc > 0) or np.all(inc < 0)
    if not same_sign:
        return CutoffVerdict("inconclusive", vK, qerr, note="increments change sign")
    sigma, r2 = _fit(np.log(dl), np.log(np.abs(inc)))
    if r2 <= R2_MIN:
        return CutoffVerdict("inconclusive", vK, qerr, rate_exponent=-sigma, fit_quality=r2,
                             note="no clean power law in the tail")
    if sigma <= 0.02:
        if np.all(np.diff(np.abs(values[-FIT_POINTS - 1:])) > 0):
            return CutoffVerdict("divergent", math.inf, math.inf, rate_exponent=-sigma,
                                 fit_quality=r2)
        return CutoffVerdict("inconclusive", vK, qerr, rate_exponent=-sigma, fit_quality=r2,
                             note="growing increments without monotone values")
    rho = float(dl[-1] / dl[-2])
    r6 = rho**sigma
    tail6 = float(inc[-1]) * r6 / (1.0 - r6)
    r3 = float(inc[-1] / inc[-2])
    tail3 = float(inc[-1]) * r3 / (1.0 - r3) if 0.0 < r3 < 1.0 else tail6
    limit = vK + tail6
    err = abs(tail6 - tail3) + qerr + 1e-15 * abs(limit)
    acc = _aitken_limit(values[-(FIT_POINTS + 3):])
    if acc is not None and acc[1] + qerr < err:
        limit, err = acc[0], acc[1] + qerr + 1e-15 * abs(acc[0])
    return CutoffVerdict("finite_limit", limit, err, rate_exponent=-sigma, fit_quality=r2)


def _aitken_limit(values: np.ndarray):
    """Iterated Aitken delta-squared on the tail; removes the sub-leading powers of delta
    that bias a single-exponent Richardson step. Returns (limit, spread) or None."""
    level = np.asarray(values, dtype=float)
    for _ in range(2):
        if level.size < 4:
            break
        d1 = level[1:-1] - level[:-2]
        d2 = level[2:] - level[1:-1]
        den = d2 - d1
        if np.any(den == 0.0):
            break
        nxt = level[2:] - d2 * d2 / den
        if not np.all(np.isfinite(nxt)):
            break
        level = nxt
    if level.size < 2 or level.size == len(values):
        return None
    return float(level[-1]), 2.0 * abs(float(level[-1] - level[-2]))


class _LevelSets:
    """Breakpoints of {level(x) > delta} on a finite range, found on a grid plus
    bisection next to every anchor (zeros of f and range ends)."""

    def __init__(self, level: Callable, rng: Interval, anchors: Sequence):
        self.level = level
        self.rng = rng
        self.xs = np.linspace(rng.a, rng.b, GRID_DIVISIONS + 1)
        self.lv = level(self.xs)
        self.anchors = sorted({min(max(float(z), rng.a), rng.b) for z in anchors})
        self.xtol = 1e-14 * max(1.0, rng.length)

    def _scalar(self, x: float) -> float:
        return float(self.level(np.array([x]))[0])

    def breakpoints(self, delta: float) -> list:
        d = self.lv - delta
        out = []
        idx = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]
        fn = lambda x: self._scalar(x) - delta  # noqa: E731
        for i in idx:
            out.append(brentq(fn, self.xs[i], self.xs[i + 1], xtol=self.xtol))
        out.extend(float(x) for x in self.xs[d == 0.0])
        for z in self.anchors:
            if self._scalar(z) - delta >= 0:
                continue
            j = int(np.searchsorted(self.xs, z))
            for nb in (j - 1, j, j + 1):
                if 0 <= nb < len(self.xs) and self.xs[nb] != z and d[nb] > 0:
                    lo, hi = sorted((z, float(self.xs[nb])))
                    if abs(hi - lo) <= 1.5 * (self.xs[1] - self.xs[0]):
                        out.append(brentq(fn, lo, hi, xtol=self.xtol))
        return sorted(set(out))


def _segments(rng: Interval, cuts: Sequence) -> list:
    pts = sorted({rng.a, rng.b, *(c for c in cuts if rng.a < c < rng.b)})
    return [(lo, hi) for lo, hi in zip(pts[:-1], pts[1:]) if hi > lo]


def integrate_excluding(g: Callable, f: TestFunction, window: Interval,
                        restriction: str = "f_nonzero", deltas: Optional[Sequence] = None,
                        abs_tol: float = DEFAULT_ABS_TOL, rel_tol: float = DEFAULT_REL_TOL,
                        knots: Sequence = (), zero_anchors: Optional[Sequence] = None
                        ) -> CutoffReport:
    """Integrate g over window minus {|f| <= delta} (or {f <= delta}) along a shrinking
    delta schedule and extrapolate to delta -> 0."""
    tols = {"abs_tol": abs_tol, "rel_tol": rel_tol}
    rng = sampling_range(f, window)
    if restriction == "none":
        res = integrate(g, rng, abs_tol, rel_tol, knots)
        kind = "finite_limit" if res.converged else (
            "divergent" if res.status == "divergent_suspected" else "inconclusive")
        v = CutoffVerdict(kind, res.value if kind != "divergent" else math.inf,
                          res.error_estimate)
        return CutoffReport([(0.0, res.value)], v, "none", res.error_estimate,
                            [res.status], tols)
    if restriction == "f_nonzero":
        def level(x):
            return np.abs(f.value(x))
    elif restriction == "f_positive":
        def level(x):
            return np.asarray(f.value(x), dtype=float)
    else:
        raise QuadError("BAD_RESTRICTION", restriction)
    if zero_anchors is None:
        zero_anchors = locate_zeros(f, window).anchors()
    ls = _LevelSets(level, rng, list(zero_anchors) + [rng.a, rng.b])
    scale = float(np.max(np.abs(ls.lv))) or 1.0
    if deltas is None:
        deltas = default_schedule(scale)
    deltas = [float(d) for d in deltas]
    if any(d2 >= d1 for d1, d2 in zip(deltas[:-1], deltas[1:])):
        raise QuadError("BAD_SCHEDULE", "delta schedule must be strictly decreasing")

    values, errors, statuses = [], [], []
    prev_bp: list = []
    running = 0.0
    shell_tol = min(abs_tol, 1e-14)
    for k, d in enumerate(deltas):
        bp = ls.breakpoints(d)
        upper = deltas[k - 1] if k else math.inf
        segs = _segments(rng, bp + prev_bp)
        shell, serr = [], 0.0
        for lo, hi in segs:
            lm = float(level(np.array([0.5 * (lo + hi)]))[0])
            if lm > d and lm <= upper:
                res = integrate(g, Interval(lo, hi), shell_tol if k else abs_tol, rel_tol,
                                knots)
                statuses.append(res.status)
                if res.status == "divergent_suspected":
                    v = CutoffVerdict("inconclusive", math.nan, math.inf,
                                      note=f"non-finite integrand on [{lo:.6g}, {hi:.6g}]")
                    return CutoffReport(list(zip(deltas, values)), v, restriction,
                                        math.inf, statuses, tols)
                shell.append(res.value)
                serr += res.error_estimate
        running += math.fsum(shell)
        values.append(running)
        errors.append(serr)
        prev_bp = bp
    verdict = extrapolate_cutoff(deltas, values, errors)
    if any(s == "max_subdivisions" for s in statuses) and verdict.kind == "finite_limit":
        verdict.note = (verdict.note + "; " if verdict.note else "") + "quadrature budget hit"
    return CutoffReport(list(zip(deltas, values)), verdict, restriction,
                        float(math.fsum(errors)), statuses, tols)


def cutoff_integral(g: Callable, lo_end: float, hi_end: float, deltas: Sequence,
                    abs_tol: float = DEFAULT_ABS_TOL, rel_tol: float = DEFAULT_REL_TOL
                    ) -> CutoffReport:
    """V(delta) = integral of g over [lo_end + delta, hi_end] for a decreasing schedule."""
    values, errors, statuses = [], [], []
    running = 0.0
    prev = hi_end
    for k, d in enumerate(deltas):
        res = integrate(g, Interval(lo_end + d, prev), abs_tol if not k else min(abs_tol, 1e-14),
                        rel_tol)
        statuses.append(res.status)
        if res.status == "divergent_suspected":
            return CutoffReport(list(zip(deltas, values)),
                                CutoffVerdict("inconclusive", math.nan, math.inf),
                                "lower_cutoff", math.inf, statuses)
        running += res.value
        values.append(running)
        errors.append(res.error_estimate)
        prev = lo_end + d
    return CutoffReport(list(zip(deltas, values)), extrapolate_cutoff(deltas, values, errors),
                        "lower_cutoff", float(math.fsum(errors)), statuses)


# ---------------------------------------------------------------- boundary

def boundary_limit(expr: Callable, window: Interval, endpoint: str, K: int = 40
                   ) -> BoundaryEstimate:
    """Tail inf/sup of expr along a geometric approach to one end of the window.

    A finite number of samples cannot certify a liminf, so the estimate is always
    marked heuristic.
    """
    if endpoint not in ("a", "b"):
        raise QuadError("BAD_ENDPOINT", endpoint)
    j = np.arange(1, K + 1, dtype=float)
    if endpoint == "a":
        if window.finite_a:
            d0 = min(1.0, window.length / 4.0) if window.finite_b else 1.0
            xs = window.a + d0 * 2.0**-j
        else:
            base = window.b if window.finite_b else 0.0
            xs = base - 2.0**j
    else:
        if window.finite_b:
            d0 = min(1.0, window.length / 4.0) if window.finite_a else 1.0
            xs = window.b - d0 * 2.0**-j
        else:
            base = window.a if window.finite_a else 0.0
            xs = base + 2.0**j
    with np.errstate(all="ignore"):
        vals = np.asarray(expr(xs), dtype=float)
    tail = vals[-int(math.ceil(K / 3.0)):]
    if not np.all(np.isfinite(tail)):
        raise QuadError("EVAL_FAIL", f"expression not evaluable near endpoint {endpoint}")
    return BoundaryEstimate(endpoint, float(tail.min()), float(tail.max()),
                            list(zip(xs.tolist(), vals.tolist())))


__all__ = [
    "QuadError", "QuadratureResult", "CutoffVerdict", "CutoffReport", "BoundaryEstimate",
    "integrate", "integrate_improper", "integrate_excluding", "cutoff_integral",
    "boundary_limit", "default_schedule", "extrapolate_cutoff", "gk15",
]
