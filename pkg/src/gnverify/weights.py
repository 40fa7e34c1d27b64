"""Weight registry and the transform engine: primitives H, the transform T_h = H/h,
the auxiliary G_h = |T_h|^{p/2} h / lambda^{p/2}, and near-zero classification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .funcspace import Interval
from .quad import cutoff_integral, integrate

REAL_LINE = Interval(-math.inf, math.inf)
HALF_LINE = Interval(0.0, math.inf)
MONOTONE_RTOL = 1e-12
CLASSIFY_LEVELS = 40


class WeightError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class Weight:
    domain: Interval
    h: Callable
    closed_primitive: Optional[Callable] = None
    anchor_note: str = ""
    family_tag: str = "custom"
    params: tuple = ()
    zero_set_countable: bool = True
    H_zero_limit: Optional[float] = None  # limit of the closed primitive at 0+, if finite

    @property
    def label(self) -> str:
        if not self.params:
            return self.family_tag
        return self.family_tag + "(" + ",".join(f"{k}={v:g}" for k, v in self.params) + ")"

    def param(self, key: str, default=None):
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class TransformedWeight:
    weight: Weight
    H: Callable
    anchor: str
    anchor_constant: float = 0.0
    numeric: bool = False
    H_tilde_zero: Optional[float] = None
    zero_limit: Optional[float] = None
    p: Optional[float] = None

    def h(self, lam):
        with np.errstate(all="ignore"):
            return np.asarray(self.weight.h(np.asarray(lam, dtype=float)), dtype=float)

    def Hv(self, lam):
        with np.errstate(all="ignore"):
            return np.asarray(self.H(np.asarray(lam, dtype=float)), dtype=float)

    def T(self, lam):
        """H/h where h != 0, and 0 on the zero set of h."""
        hv = self.h(lam)
        Hv = self.Hv(lam)
        with np.errstate(all="ignore"):
            return np.where(hv != 0.0, Hv / np.where(hv != 0.0, hv, 1.0), 0.0)

    def G(self, lam, p: Optional[float] = None):
        p = self.p if p is None else p
        if p is None:
            raise WeightError("NEED_P", "G_h needs the exponent p")
        lam = np.asarray(lam, dtype=float)
        with np.errstate(all="ignore"):
            return np.abs(self.T(lam)) ** (p / 2.0) * self.h(lam) / np.abs(lam) ** (p / 2.0)

    def H_tilde(self, lam, at_zero: Optional[float] = None):
        """H extended to lambda = 0 by the value at_zero (default: H_tilde_zero)."""
        z = self.H_tilde_zero if at_zero is None else at_zero
        lam = np.asarray(lam, dtype=float)
        Hv = self.Hv(np.where(lam == 0.0, 1.0, lam))
        return np.where(lam == 0.0, np.nan if z is None else z, Hv)

    def with_p(self, p: float) -> "TransformedWeight":
        return TransformedWeight(self.weight, self.H, self.anchor, self.anchor_constant,
                                 self.numeric, self.H_tilde_zero, self.zero_limit, p)

    @property
    def label(self) -> str:
        return f"{self.weight.label}[{self.anchor}]"


@dataclass(frozen=True)
class WeightClass:
    bounded_near_zero: bool
    nonincreasing_near_zero: bool
    integrable_near_zero: bool
    T_half_p_h_bounded_near_zero: bool
    T_half_p_h_nonincreasing_near_zero: bool
    G_bounded_or_nonincreasing_near_zero: bool
    epsilon_used: float

    @property
    def h_ok(self) -> bool:
        return self.bounded_near_zero or self.nonincreasing_near_zero

    @property
    def T_ok(self) -> bool:
        return self.T_half_p_h_bounded_near_zero or self.T_half_p_h_nonincreasing_near_zero


# ---------------------------------------------------------------- registry

def _power(theta: float, p: float) -> Weight:
    e = theta * p
    if abs(1.0 - e) < 1e-14:
        raise WeightError("SINGULAR_PARAMS", "power weight needs theta*p != 1 (use log_reciprocal)")
    c = 1.0 - e
    return Weight(HALF_LINE, lambda x: x ** (-e), lambda x: x**c / c,
                  "H = lambda^(1-theta p)/(1-theta p)", "power",
                  (("theta", theta), ("p", p)), True, 0.0 if c > 0 else None)


def _exponential(alpha: float, beta: float, shifted: bool) -> Weight:
    if alpha == 0.0:
        raise WeightError("SINGULAR_PARAMS", "exponential weight needs alpha != 0")
    if beta < 1.0:
        raise WeightError("SINGULAR_PARAMS", "exponential weight needs beta >= 1")
    ab = alpha * beta
    dom = REAL_LINE if beta == 1.0 else HALF_LINE
    if beta == 1.0:
        def h(x):
            return np.exp(alpha * x)
    else:
        def h(x):
            return x ** (beta - 1.0) * np.exp(alpha * x**beta)
    if shifted:
        def H(x):
            return np.expm1(alpha * x**beta) / ab
        note, lim = "H1 = (exp(alpha lambda^beta) - 1)/(alpha beta)", 0.0
    else:
        def H(x):
            return np.exp(alpha * x**beta) / ab
        note, lim = "H = exp(alpha lambda^beta)/(alpha beta)", 1.0 / ab
    params = (("alpha", alpha), ("beta", beta)) + ((("shifted", 1.0),) if shifted else ())
    return Weight(dom, h, H, note, "exponential", params, True, lim)


def load_weight_table(path) -> Weight:
    """Custom weight from a two-column (lambda, h) file, shape-preserving interpolation."""
    data = np.loadtxt(path, dtype=float, ndmin=2)
    if data.shape[1] != 2 or data.shape[0] < 2:
        raise WeightError("BAD_PARAMS", f"{path}: expected two columns")
    return tabulated_weight(data[:, 0], data[:, 1])


def tabulated_weight(lams, hs) -> Weight:
    lams = np.asarray(lams, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if np.any(np.diff(lams) <= 0) or np.any(hs < 0):
        raise WeightError("BAD_PARAMS", "table needs increasing lambda and h >= 0")
    interp = PchipInterpolator(lams, hs, extrapolate=False)
    prim = interp.antiderivative()
    return Weight(Interval(lams[0], lams[-1]), interp, prim,
                  f"H(lambda)=int_{lams[0]:g}^lambda h", "custom", (("n", float(lams.size)),),
                  True, None)


def registry(name: str, **params) -> Weight:
    if name == "unit":
        return Weight(REAL_LINE, lambda x: np.ones_like(np.asarray(x, dtype=float)),
                      lambda x: np.asarray(x, dtype=float), "H = lambda", "unit", (), True, 0.0)
    if name == "power":
        return _power(float(params.get("theta", 0.5)), float(params.get("p", 2.0)))
    if name == "log_reciprocal":
        return Weight(HALF_LINE, lambda x: 1.0 / x, np.log, "H = ln lambda", "log_reciprocal",
                      (), True, None)
    if name == "exponential":
        return _exponential(float(params.get("alpha", 1.0)), float(params.get("beta", 1.0)),
                            bool(params.get("shifted", False)))
    if name == "custom":
        if "table" in params:
            return load_weight_table(params["table"])
        h = params.get("h")
        if not callable(h):
            raise WeightError("BAD_PARAMS", "custom weight needs a callable h or a table path")
        dom = params.get("domain", HALF_LINE)
        return Weight(dom, h, params.get("H"), str(params.get("anchor_note", "")), "custom", (),
                      bool(params.get("zero_set_countable", True)), params.get("H_zero_limit"))
    raise WeightError("UNKNOWN_WEIGHT", f"unknown weight {name!r}")


# ---------------------------------------------------------------- primitives

def _table_nodes(domain: Interval, lam0: float) -> np.ndarray:
    if domain.a == 0.0 and not domain.finite_b:
        nodes = np.geomspace(1e-8, 1e8, 3201)
    elif domain.is_finite:
        nodes = np.linspace(domain.a, domain.b, 2049)
    elif not domain.finite_a and not domain.finite_b:
        tail = np.geomspace(60.0, 500.0, 801)
        nodes = np.concatenate([-tail[::-1], np.linspace(-60.0, 60.0, 12001), tail])
    else:
        raise WeightError("BAD_DOMAIN", f"no primitive table layout for {domain}")
    return np.unique(np.append(nodes, lam0))


_GL20 = np.polynomial.legendre.leggauss(20)
_GL12 = np.polynomial.legendre.leggauss(12)


def _gauss(h: Callable, lo: np.ndarray, hi: np.ndarray, rule) -> np.ndarray:
    x, w = rule
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * x[None, :]
    with np.errstate(all="ignore"):
        vals = np.asarray(h(pts.reshape(-1)), dtype=float).reshape(pts.shape)
    return half * (vals @ w)


def cell_integrals(h: Callable, lo, hi, rtol: float = 1e-14) -> np.ndarray:
    """int_lo^hi h for many short cells at once: a 20-point Gauss rule checked against a
    12-point rule, with adaptive quadrature for the cells where the two disagree."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.size == 0:
        return np.zeros(0)
    fine = _gauss(h, lo, hi, _GL20)
    coarse = _gauss(h, lo, hi, _GL12)
    bad = ~(np.abs(fine - coarse) <= rtol * np.abs(fine) + 1e-300) | ~np.isfinite(fine)
    for i in np.nonzero(bad)[0]:
        fine[i] = integrate(h, Interval(float(lo[i]), float(hi[i])), 1e-15, 1e-13).value
    return fine


class _NumericPrimitive:
    """H(lambda) = c + int_{lam0}^lambda h, tabulated once and interpolated with
    cubic Hermite pieces that use h itself as the slope. When the spline fails a
    midpoint self-check, every value is the table entry plus one exact cell integral."""

    def __init__(self, h: Callable, domain: Interval, lam0: float, c0: float,
                 interpolate: bool = True):
        self.h = h
        self.interpolate = interpolate
        self.lam0, self.c0 = lam0, c0
        nodes = _table_nodes(domain, lam0)
        with np.errstate(all="ignore"):
            hn = np.asarray(h(nodes), dtype=float)
        keep = np.isfinite(hn) & (np.abs(hn) < 1e200)
        nodes = nodes[keep]
        pieces = cell_integrals(h, nodes[:-1], nodes[1:])
        i0 = int(np.searchsorted(nodes, lam0))
        # accumulate outward from the anchor so small values keep their relative accuracy
        right = np.cumsum(pieces[i0:])
        left = -np.cumsum(pieces[:i0][::-1])[::-1]
        vals = c0 + np.concatenate([left, [0.0], right])
        self.nodes = nodes
        self.vals = vals
        self.spline = CubicHermiteSpline(nodes, vals, hn[keep], extrapolate=False)
        if interpolate and not self._spline_trusted():
            self.interpolate = False

    def _spline_trusted(self, rtol: float = 1e-11) -> bool:
        mids = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        s = np.asarray(self.spline(mids), dtype=float)
        exact = self._exact(mids)
        return bool(np.all(np.abs(s - exact) <= rtol * np.abs(exact) + 1e-15))

    def _exact(self, x: np.ndarray) -> np.ndarray:
        j = np.clip(np.searchsorted(self.nodes, x), 0, len(self.nodes) - 1)
        # nearest of the two bracketing nodes keeps the correction cell short
        left = np.clip(j - 1, 0, len(self.nodes) - 1)
        j = np.where(np.abs(self.nodes[left] - x) < np.abs(self.nodes[j] - x), left, j)
        ref = self.nodes[j]
        lo, hi = np.minimum(x, ref), np.maximum(x, ref)
        move = hi > lo
        piece = np.zeros(x.shape)
        piece[move] = cell_integrals(self.h, lo[move], hi[move])
        return self.vals[j] + np.where(x > ref, piece, -piece)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.interpolate:
            out = np.asarray(self.spline(lam), dtype=float)
        else:
            out = np.full(lam.shape, np.nan)
        bad = ~np.isfinite(out) & np.isfinite(lam)
        if np.any(bad):
            out = out.copy()
            out[bad] = self._exact(lam[bad])
        return out


def _zero_integral(h: Callable, eps: float):
    deltas = [eps * 2.0**-k for k in range(4, 25)]
    return cutoff_integral(h, 0.0, eps, deltas)


def make_primitive(w: Weight, anchor="closed_form", p: Optional[float] = None
                   ) -> TransformedWeight:
    """anchor: "closed_form", "zero_anchored", or ("point_anchored", lam0, c)."""
    if anchor == "closed_form":
        if w.closed_primitive is None:
            raise WeightError("NO_CLOSED_FORM", f"{w.label} has no closed-form primitive")
        return TransformedWeight(w, w.closed_primitive, "closed_form", 0.0, False,
                                 w.H_zero_limit, w.H_zero_limit, p)
    if anchor == "zero_anchored":
        if not (w.domain.a <= 0.0 < w.domain.b):
            raise WeightError("BAD_ANCHOR", "zero anchoring needs 0 in the closed domain")
        eps = min(0.5, w.domain.b / 2.0)
        rep = _zero_integral(w.h, eps)
        if rep.verdict.kind != "finite_limit":
            raise WeightError("NOT_INTEGRABLE_AT_ZERO",
                              f"int_delta^eps h does not converge ({rep.verdict.kind})")
        if w.closed_primitive is not None and w.H_zero_limit is not None:
            base, lim = w.closed_primitive, w.H_zero_limit
            return TransformedWeight(w, lambda x: base(x) - lim, "zero_anchored", -lim, False,
                                     0.0, 0.0, p)
        # anchor at the first table node so values near 0 are not differences of O(1) sums
        lo = 1e-8 if not w.domain.finite_b else w.domain.a
        c0 = _zero_integral(w.h, lo).verdict.value if lo > 0 else 0.0
        H = _NumericPrimitive(w.h, w.domain, lo, c0)
        return TransformedWeight(w, H, "zero_anchored", 0.0, True, 0.0, 0.0, p)
    if isinstance(anchor, tuple) and anchor and anchor[0] == "point_anchored":
        lam0, c = float(anchor[1]), float(anchor[2])
        if not (w.domain.a < lam0 < w.domain.b):
            raise WeightError("BAD_ANCHOR", f"anchor point {lam0} outside {w.domain}")
        H = _NumericPrimitive(w.h, w.domain, lam0, c)
        return TransformedWeight(w, H, f"point_anchored({lam0:g},{c:g})", c, True, None,
                                 None, p)
    raise WeightError("BAD_ANCHOR", f"unknown anchor {anchor!r}")


def shift_primitive(tw: TransformedWeight, c: float) -> TransformedWeight:
    """Same weight with primitive H + c."""
    base = tw.H
    zl = None if tw.zero_limit is None else tw.zero_limit + c
    return TransformedWeight(tw.weight, lambda x: base(x) + c, f"{tw.anchor}+{c:g}",
                             tw.anchor_constant + c, tw.numeric, zl, zl, tw.p)


def transform_value(tw: TransformedWeight, lam: float) -> float:
    return float(tw.T(np.array([lam]))[0])


# ---------------------------------------------------------------- classification

def _is_bounded(vals: np.ndarray) -> bool:
    a = np.abs(vals)
    if not np.all(np.isfinite(a)):
        return False
    tail = a[-12:]
    d = np.diff(tail)
    scale = max(1.0, float(np.max(a)))
    if np.all(d <= MONOTONE_RTOL * scale):
        return True
    pos = d > MONOTONE_RTOL * scale
    if not np.all(pos[np.argmax(pos):]):
        return False
    dd = d[np.argmax(pos):]
    return bool(dd.size >= 2 and np.all(dd[1:] <= 0.9 * dd[:-1]))


def _is_nonincreasing(vals: np.ndarray) -> bool:
    """vals sampled along decreasing lambda; nonincreasing in lambda means they never drop."""
    if not np.all(np.isfinite(vals)):
        return bool(np.all(np.isfinite(vals[:-1])) and vals[-1] == np.inf)
    return bool(np.all(vals[1:] >= vals[:-1] - MONOTONE_RTOL * np.abs(vals[:-1])))


def classify_weight(tw: TransformedWeight, p: float, eps: float = 0.5) -> WeightClass:
    if p < 2:
        raise WeightError("BAD_PARAMS", "classification needs p >= 2")
    lam = eps * 2.0 ** -np.arange(CLASSIFY_LEVELS + 1, dtype=float)
    hv = tw.h(lam)
    tv = np.abs(tw.T(lam)) ** (p / 2.0) * hv
    gv = tw.G(lam, p)
    integrable = _zero_integral(tw.weight.h, eps).verdict.kind == "finite_limit"
    return WeightClass(
        bounded_near_zero=_is_bounded(hv),
        nonincreasing_near_zero=_is_nonincreasing(hv),
        integrable_near_zero=integrable,
        T_half_p_h_bounded_near_zero=_is_bounded(tv),
        T_half_p_h_nonincreasing_near_zero=_is_nonincreasing(tv),
        G_bounded_or_nonincreasing_near_zero=_is_bounded(gv) or _is_nonincreasing(gv),
        epsilon_used=eps,
    )


def parse_weight_spec(spec: str) -> Weight:
    """'power:theta=0.5,p=4' style tags as used in configs and on the command line."""
    name, _, rest = spec.strip().partition(":")
    params: dict = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        k, eq, v = item.partition("=")
        if not eq:
            raise WeightError("BAD_SPEC", f"expected key=value in {spec!r}")
        params[k.strip()] = v.strip() if k.strip() == "table" else float(v)
    return registry(name.strip(), **params)


__all__ = [
    "WeightError", "Weight", "TransformedWeight", "WeightClass", "registry",
    "make_primitive", "shift_primitive", "transform_value", "classify_weight",
    "load_weight_table", "tabulated_weight", "parse_weight_spec",
]
