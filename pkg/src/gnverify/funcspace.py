"""Test functions with exact jets (f, f', f''), analytic families and zero-set analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar
from scipy.special import expit

Jet = Callable[[np.ndarray], tuple]

GRID_DIVISIONS = 4096


class FuncSpaceError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if math.isnan(a) or math.isnan(b) or not a < b:
            raise FuncSpaceError("BAD_INTERVAL", f"need a < b, got ({a}, {b})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def finite_a(self) -> bool:
        return math.isfinite(self.a)

    @property
    def finite_b(self) -> bool:
        return math.isfinite(self.b)

    @property
    def is_finite(self) -> bool:
        return self.finite_a and self.finite_b

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains_open(self, x):
        return (np.asarray(x) > self.a) & (np.asarray(x) < self.b)

    def contains(self, other: "Interval") -> bool:
        return self.a <= other.a and other.b <= self.b

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        a, b = max(self.a, other.a), min(self.b, other.b)
        return Interval(a, b) if a < b else None

    def __str__(self) -> str:
        return f"[{self.a:g}, {self.b:g}]"


@dataclass(frozen=True)
class TestFunction:
    """A W^{2,1}_loc function given by its jet.

    ``jet_fn`` maps an array of points to ``(f, f', f'')`` arrays. When ``closed``
    is true the jet is also valid at finite endpoints of the domain, which the
    cutoff and boundary machinery relies on.
    """

    __test__ = False  # keep pytest from collecting this class

    domain: Interval
    jet_fn: Jet = field(repr=False)
    deriv_support: Optional[Interval] = None
    family_tag: str = "custom"
    params: tuple = ()
    knots: tuple = ()
    closed: bool = True

    def jet(self, x):
        x = np.asarray(x, dtype=float)
        f0, f1, f2 = self.jet_fn(x)
        return (np.broadcast_to(f0, x.shape).astype(float),
                np.broadcast_to(f1, x.shape).astype(float),
                np.broadcast_to(f2, x.shape).astype(float))

    def value(self, x):
        return self.jet(x)[0]

    @property
    def label(self) -> str:
        if not self.params:
            return self.family_tag
        inner = ",".join(f"{k}={v:g}" if isinstance(v, (int, float)) else f"{k}={v}"
                         for k, v in self.params)
        return f"{self.family_tag}({inner})"


@dataclass(frozen=True)
class Zero:
    location: float
    kind: str  # "single" | "double" | "flat-interval"
    extent: Optional[tuple] = None


@dataclass
class ZeroSet:
    zeros: list
    resolution: float
    boundary_zeros: list = field(default_factory=list)
    caveat: str = "zeros certified on the sampling grid only"

    def locations(self) -> list:
        return [z.location for z in self.zeros]

    def anchors(self) -> list:
        """Every point near which |f| can dip below a small level."""
        pts = list(self.boundary_zeros)
        for z in self.zeros:
            pts.append(z.location)
            if z.extent is not None:
                pts.extend(z.extent)
        return sorted(set(pts))


@dataclass(frozen=True)
class FunctionFlags:
    nonnegative: bool
    strictly_positive: bool
    no_single_zeroes: bool


def eval_jet(f: TestFunction, x: float) -> tuple:
    if not bool(f.domain.contains_open(x)):
        raise FuncSpaceError("OUT_OF_DOMAIN", f"x={x} outside {f.domain}")
    f0, f1, f2 = f.jet(np.array([x], dtype=float))
    return float(f0[0]), float(f1[0]), float(f2[0])


# ---------------------------------------------------------------- families

def _poly_bump(k: float) -> Jet:
    def jet(x):
        u = 1.0 - x * x
        inside = np.abs(x) < 1.0
        u = np.where(inside, u, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            f0 = u ** k
            f1 = -2.0 * k * x * u ** (k - 1)
            f2 = 4.0 * k * (k - 1) * x * x * u ** (k - 2) - 2.0 * k * u ** (k - 1)
        return (np.where(inside, f0, 0.0), np.where(inside, f1, 0.0),
                np.where(inside, f2, 0.0))
    return jet


def _smooth_bump_jet(x):
    s = 1.0 - x * x
    ok = s > 1.0 / 700.0
    s = np.where(ok, s, 1.0)
    phi = 1.0 - 1.0 / s
    d1 = -2.0 * x / s**2
    d2 = -2.0 / s**2 - 8.0 * x * x / s**3
    e = np.exp(phi)
    return (np.where(ok, e, 0.0), np.where(ok, d1 * e, 0.0),
            np.where(ok, (d2 + d1 * d1) * e, 0.0))


def smooth_step(t):
    """Exp-based smooth step S with S = 0 for t <= 0 and S = 1 for t >= 1, plus S', S''."""
    t = np.asarray(t, dtype=float)
    mid = (t > 0.0) & (t < 1.0)
    tm = np.where(mid, t, 0.5)
    u = 1.0 / tm - 1.0 / (1.0 - tm)
    du = -1.0 / tm**2 - 1.0 / (1.0 - tm) ** 2
    ddu = 2.0 / tm**3 - 2.0 / (1.0 - tm) ** 3
    s = expit(-u)
    p = expit(u) * s
    s1 = -p * du
    s2 = -s1 * (1.0 - 2.0 * s) * du - p * ddu
    s0 = np.where(mid, s, np.where(t >= 1.0, 1.0, 0.0))
    return s0, np.where(mid, s1, 0.0), np.where(mid, s2, 0.0)


def _sine_bump_jet(x):
    ax = np.abs(x)
    sg = np.sign(x)
    S0, S1, S2 = smooth_step(2.0 - 2.0 * ax)
    p0, p1, p2 = S0, -2.0 * sg * S1, 4.0 * S2
    w = 2.0 * math.pi
    s, c = np.sin(w * x), np.cos(w * x)
    f0 = p0 * s
    f1 = p1 * s + p0 * w * c
    f2 = p2 * s + 2.0 * p1 * w * c - p0 * w * w * s
    return f0, f1, f2


def _power_profile(m: float) -> Jet:
    def jet(x):
        w = x * (1.0 - x)
        dw = 1.0 - 2.0 * x
        with np.errstate(divide="ignore", invalid="ignore"):
            f0 = w**m
            f1 = m * w ** (m - 1) * dw
            f2 = m * (m - 1) * w ** (m - 2) * dw * dw - 2.0 * m * w ** (m - 1)
        return f0, f1, f2
    return jet


def _quadratic(c0: float, c1: float, c2: float) -> Jet:
    def jet(x):
        return c0 + c1 * x + c2 * x * x, c1 + 2.0 * c2 * x, np.full_like(x, 2.0 * c2)
    return jet


def _cosh_profile(amp: float, kappa: float, shift: float) -> Jet:
    def jet(x):
        z = kappa * (x - shift)
        return amp * np.cosh(z), amp * kappa * np.sinh(z), amp * kappa**2 * np.cosh(z)
    return jet


def _exp_profile(amp: float, kappa: float) -> Jet:
    def jet(x):
        e = amp * np.exp(kappa * x)
        return e, kappa * e, kappa * kappa * e
    return jet


def _spline(xs: np.ndarray, ys: np.ndarray) -> tuple:
    sp = CubicSpline(xs, ys, bc_type="not-a-knot")
    d1, d2 = sp.derivative(1), sp.derivative(2)

    def jet(x):
        return sp(x), d1(x), d2(x)
    return jet


def _window_params(params: dict, default: tuple) -> Interval:
    return Interval(float(params.get("a", default[0])), float(params.get("b", default[1])))


def build_family(name: str, **params) -> TestFunction:
    """Construct a named analytic family.

    Families: poly_bump(k), smooth_bump, sine_bump, power_profile(m),
    affine_plus_parabola(c0, c1, c2, a, b), spline(xs, ys),
    manufactured(profile=quadratic|cosh|exp, ...).
    """
    R = Interval(-math.inf, math.inf)
    if name == "poly_bump":
        k = float(params.get("k", 2))
        if not k >= 2:
            raise FuncSpaceError("BAD_PARAMS", f"poly_bump needs k >= 2, got {k}")
        return TestFunction(R, _poly_bump(k), Interval(-1.0, 1.0), "poly_bump", (("k", k),))
    if name == "smooth_bump":
        return TestFunction(R, _smooth_bump_jet, Interval(-1.0, 1.0), "smooth_bump")
    if name == "sine_bump":
        return TestFunction(R, _sine_bump_jet, Interval(-1.0, 1.0), "sine_bump")
    if name == "power_profile":
        m = float(params.get("m", 2))
        if not m >= 2:
            raise FuncSpaceError("BAD_PARAMS", f"power_profile needs m >= 2, got {m}")
        return TestFunction(Interval(0.0, 1.0), _power_profile(m), None, "power_profile",
                            (("m", m),))
    if name == "affine_plus_parabola":
        c0 = float(params.get("c0", 1.0))
        c1 = float(params.get("c1", 1.0))
        c2 = float(params.get("c2", -1.0))
        dom = _window_params(params, (0.0, 1.0))
        return TestFunction(dom, _quadratic(c0, c1, c2), None, "affine_plus_parabola",
                            (("c0", c0), ("c1", c1), ("c2", c2)))
    if name == "spline":
        xs = np.asarray(params.get("xs"), dtype=float)
        ys = np.asarray(params.get("ys"), dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 4:
            raise FuncSpaceError("BAD_PARAMS", "spline needs matching xs, ys with >= 4 samples")
        if np.any(np.diff(xs) <= 0) or not np.all(np.isfinite(ys)):
            raise FuncSpaceError("BAD_PARAMS", "spline samples need strictly increasing x")
        return TestFunction(Interval(xs[0], xs[-1]), _spline(xs, ys), None, "spline",
                            (("n", int(xs.size)),), tuple(float(v) for v in xs))
    if name == "manufactured":
        profile = params.get("profile", "quadratic")
        dom = _window_params(params, (0.0, 1.0))
        if profile == "quadratic":
            c0 = float(params.get("c0", 1.0))
            c1 = float(params.get("c1", 0.0))
            c2 = float(params.get("c2", 1.0))
            jet = _quadratic(c0, c1, c2)
            tag = (("profile", "quadratic"), ("c0", c0), ("c1", c1), ("c2", c2))
        elif profile == "cosh":
            amp = float(params.get("amp", 1.0))
            kappa = float(params.get("kappa", 1.0))
            shift = float(params.get("shift", 0.5))
            jet = _cosh_profile(amp, kappa, shift)
            tag = (("profile", "cosh"), ("amp", amp), ("kappa", kappa), ("shift", shift))
        elif profile == "exp":
            amp = float(params.get("amp", 1.0))
            kappa = float(params.get("kappa", 1.0))
            jet = _exp_profile(amp, kappa)
            tag = (("profile", "exp"), ("amp", amp), ("kappa", kappa))
        else:
            raise FuncSpaceError("BAD_PARAMS", f"unknown manufactured profile {profile!r}")
        return TestFunction(dom, jet, None, "manufactured", tag)
    raise FuncSpaceError("BAD_PARAMS", f"unknown family {name!r}")


def load_samples(path) -> TestFunction:
    """Spline through a two-column (x, f(x)) text file."""
    data = np.loadtxt(path, dtype=float, ndmin=2)
    if data.shape[1] != 2:
        raise FuncSpaceError("BAD_PARAMS", f"{path}: expected two columns")
    return build_family("spline", xs=data[:, 0], ys=data[:, 1])


def dilate(f: TestFunction, s: float) -> TestFunction:
    """x -> f(s x) for s > 0."""
    if not s > 0:
        raise FuncSpaceError("BAD_PARAMS", "dilation factor must be positive")

    def jet(x):
        f0, f1, f2 = f.jet_fn(s * x)
        return f0, s * f1, s * s * f2

    sup = None
    if f.deriv_support is not None:
        sup = Interval(f.deriv_support.a / s, f.deriv_support.b / s)
    return TestFunction(Interval(f.domain.a / s, f.domain.b / s), jet, sup, f.family_tag,
                        f.params + (("dilation", s),), tuple(k / s for k in f.knots), f.closed)


def rescale(f: TestFunction, c: float) -> TestFunction:
    """x -> c f(x)."""
    def jet(x):
        f0, f1, f2 = f.jet_fn(x)
        return c * f0, c * f1, c * f2

    return TestFunction(f.domain, jet, f.deriv_support, f.family_tag,
                        f.params + (("scale", c),), f.knots, f.closed)


# ---------------------------------------------------------------- zero sets

def sampling_range(f: TestFunction, window: Interval) -> Interval:
    """A finite closed range carrying everything interesting about f on the window."""
    w = window.intersect(f.domain)
    if w is None:
        raise FuncSpaceError("BAD_WINDOW", f"window {window} misses domain {f.domain}")
    if w.is_finite:
        return w
    if f.deriv_support is None:
        raise FuncSpaceError("BAD_WINDOW", "infinite window needs a bounded derivative support")
    s = f.deriv_support
    pad = 0.25 * s.length
    lo = max(w.a, s.a - pad)
    hi = min(w.b, s.b + pad)
    return Interval(lo, hi)


def _grid(f: TestFunction, rng: Interval, resolution: Optional[float]):
    if resolution is None:
        resolution = rng.length / GRID_DIVISIONS
    n = max(16, int(math.ceil(rng.length / resolution)))
    xs = np.linspace(rng.a, rng.b, n + 1)
    if not f.closed:
        eps = 1e-12 * rng.length
        xs[0] += eps if rng.a == f.domain.a else 0.0
        xs[-1] -= eps if rng.b == f.domain.b else 0.0
    return xs, rng.length / n


def _refine_edge(fv, x_zero: float, x_nonzero: float, tol: float) -> float:
    """Boundary between an exact-zero stretch and a nonzero point."""
    lo, hi = x_zero, x_nonzero
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if fv(mid) == 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def locate_zeros(f: TestFunction, window: Interval, resolution: Optional[float] = None) -> ZeroSet:
    rng = sampling_range(f, window)
    xs, step = _grid(f, rng, resolution)
    v = f.value(xs)
    n = len(xs) - 1
    scale = float(np.max(np.abs(v))) or 1.0
    xtol = 1e-12 * max(1.0, rng.length)

    def fv(x):
        return float(f.value(np.array([x]))[0])

    sgn = np.sign(v)
    zeros: list = []
    boundary: list = []
    i = 0
    while i <= n:
        if sgn[i] == 0.0:
            j = i
            while j + 1 <= n and sgn[j + 1] == 0.0:
                j += 1
            left = sgn[i - 1] if i > 0 else 0.0
            right = sgn[j + 1] if j < n else 0.0
            if i == j:
                if i == 0 or i == n:
                    boundary.append(float(xs[i]))
                else:
                    kind = "single" if left * right < 0 else "double"
                    zeros.append(Zero(float(xs[i]), kind))
            else:
                lo_edge = _refine_edge(fv, xs[i], xs[i - 1], xtol) if i > 0 else float(xs[0])
                hi_edge = _refine_edge(fv, xs[j], xs[j + 1], xtol) if j < n else float(xs[n])
                if i == 0 and j == n:
                    zeros.append(Zero(0.5 * (lo_edge + hi_edge), "flat-interval",
                                      (lo_edge, hi_edge)))
                elif i == 0:
                    zeros.append(Zero(hi_edge, "double"))
                elif j == n:
                    zeros.append(Zero(lo_edge, "double"))
                else:
                    zeros.append(Zero(0.5 * (lo_edge + hi_edge), "flat-interval",
                                      (lo_edge, hi_edge)))
            i = j + 1
            continue
        if i < n and sgn[i + 1] != 0.0 and sgn[i] * sgn[i + 1] < 0:
            z = brentq(fv, xs[i], xs[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
            zeros.append(Zero(float(z), "single"))
        elif 0 < i < n and sgn[i - 1] == sgn[i] == sgn[i + 1] and \
                abs(v[i]) <= abs(v[i - 1]) and abs(v[i]) <= abs(v[i + 1]) and \
                abs(v[i]) < 1e-3 * scale:
            res = minimize_scalar(lambda x: abs(fv(x)), bounds=(xs[i - 1], xs[i + 1]),
                                  method="bounded", options={"xatol": xtol})
            if abs(fv(res.x)) <= 1e-10 * scale:
                zeros.append(Zero(float(res.x), "double"))
        i += 1
    zeros.sort(key=lambda z: z.location)
    return ZeroSet(zeros, step, boundary)


def classify_function(f: TestFunction, window: Interval) -> FunctionFlags:
    rng = sampling_range(f, window)
    xs, _ = _grid(f, rng, None)
    v = f.value(xs)
    zs = locate_zeros(f, window)
    no_single = all(z.kind != "single" for z in zs.zeros)
    nonneg = bool(np.min(v) >= 0.0) and no_single
    strictly = nonneg and bool(np.min(v) > 0.0)
    return FunctionFlags(nonneg, strictly, no_single)


def second_derivative_breaks(f: TestFunction, rng: Interval) -> list:
    """Sign changes of f'' on the sampling grid; |f''| has kinks there."""
    xs, _ = _grid(f, rng, None)
    d2 = f.jet(xs)[2]
    out = []
    xtol = 1e-13 * max(1.0, rng.length)

    def g(x):
        return float(f.jet(np.array([x]))[2][0])

    for i in np.nonzero(np.sign(d2[:-1]) * np.sign(d2[1:]) < 0)[0]:
        out.append(float(brentq(g, xs[i], xs[i + 1], xtol=xtol)))
    return out


__all__ = [
    "FuncSpaceError", "Interval", "TestFunction", "Zero", "ZeroSet", "FunctionFlags",
    "eval_jet", "build_family", "load_samples", "dilate", "rescale", "locate_zeros",
    "classify_function", "sampling_range", "smooth_step", "second_derivative_breaks",
]
