"""Both sides of the weighted second-order interpolation inequality

    int |f'|^p h(f)  <=  C * int |f'' T_h(f)|^{p/2} h(f)   (+ boundary / defect terms),

the admissibility regimes that make it hold, power/log/exponential specializations,
the sup-norm limit, the sign-changing counterexample, and verdict assembly."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .funcspace import (FunctionFlags, Interval, TestFunction, build_family,
                        classify_function, locate_zeros, sampling_range,
                        second_derivative_breaks)
from .quad import (BoundaryEstimate, CutoffReport, CutoffVerdict, QuadError,
                   _LevelSets, _fit, boundary_limit, integrate_excluding)
from .weights import (TransformedWeight, WeightClass, classify_weight,
                      make_primitive, registry)

REGIMES = ("R3_real_line", "R3_general", "R4_positive", "R4_nonneg_Hcont",
           "R4_nonneg_monotone", "R5_double_zeroes", "R5_H_integrable", "R5_RG")
_RESTRICTION = {
    "R3_real_line": "none", "R3_general": "none", "R4_positive": "none",
    "R4_nonneg_Hcont": "f_positive", "R4_nonneg_monotone": "f_positive",
    "R5_double_zeroes": "f_nonzero", "R5_H_integrable": "f_nonzero", "R5_RG": "f_nonzero",
}
_ONE_SIDED = {"R4_nonneg_Hcont", "R5_H_integrable"}
EPS_GRID = (0.5, 0.25, 0.125)
DEFAULT_TOL_REL = 1e-6
BOUNDARY_TOL = 1e-9


class IneqError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


def gn_constant(p: float) -> float:
    """(sqrt(p-1))^p."""
    return (p - 1.0) ** (p / 2.0)


@dataclass(frozen=True)
class InequalitySpec:
    weight: TransformedWeight
    p: float
    window: Interval
    regime: str
    use_abs_f: bool = False
    with_defect: bool = False
    part: int = 2  # R5_double_zeroes: 1 = continuous extension of H, 2 = monotone weight
    constant: Optional[float] = None
    tol_rel: float = DEFAULT_TOL_REL
    tol_abs: float = 0.0
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    deltas: Optional[tuple] = None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise IneqError("BAD_REGIME", f"unknown regime {self.regime!r}")
        if not (self.p >= 2):
            raise IneqError("BAD_PARAMS", f"p must be >= 2, got {self.p}")

    @property
    def abs_f(self) -> bool:
        return self.use_abs_f or self.regime.startswith("R5")

    @property
    def restriction(self) -> str:
        return _RESTRICTION[self.regime]

    @property
    def C(self) -> float:
        return gn_constant(self.p) if self.constant is None else self.constant

    @property
    def requirements(self) -> tuple:
        req = {
            "R3_real_line": ("window is the real line", "h finite on the range of f",
                             "h has countably many zeros"),
            "R3_general": ("h finite on the range of f", "h has countably many zeros"),
            "R4_positive": ("f > 0 on the window", "h > 0 on the range of f"),
            "R4_nonneg_Hcont": ("f >= 0", "H extends continuously to 0"),
            "R4_nonneg_monotone": ("f >= 0", "h and |T|^{p/2} h bounded or nonincreasing near 0"),
            "R5_double_zeroes": ("no single zeros",),
            "R5_H_integrable": ("h integrable near 0", "H anchored at 0"),
            "R5_RG": ("h and |T|^{p/2} h bounded or nonincreasing near 0",
                      "G_h bounded or nonincreasing when |T|^{p/2} h is not nonincreasing",
                      "eps-local finiteness of int |f'|^p G_h(|f|)"),
        }[self.regime]
        return req


@dataclass
class AdmissibilityReport:
    member: str  # yes | no | heuristic_yes | heuristic_no
    boundary: Optional[tuple] = None
    structural: dict = field(default_factory=dict)
    sufficient_condition_used: Optional[str] = None
    flags: Optional[FunctionFlags] = None
    weight_class: Optional[WeightClass] = None
    local_finiteness: tuple = ()
    notes: list = field(default_factory=list)

    @property
    def admitted(self) -> bool:
        return self.member in ("yes", "heuristic_yes")


@dataclass
class Verdict:
    lhs: CutoffReport
    rhs: CutoffReport
    constant: float
    defect: Optional[float]
    admissibility: AdmissibilityReport
    passed: str  # holds | violated | inconclusive
    slack: float
    tolerance: float
    label: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def ratio(self) -> float:
        r = self.rhs.value
        return self.lhs.value / r if r and math.isfinite(r) else math.nan

    def to_row(self) -> dict:
        return verdict_row(self)

    def to_json(self) -> dict:
        return verdict_tree(self)


# ---------------------------------------------------------------- integrands

def _safe(core, weight_part):
    with np.errstate(all="ignore"):
        out = core * weight_part
    return np.where(core == 0.0, 0.0, out)


def lhs_integrand(f: TestFunction, tw: TransformedWeight, p: float, abs_f: bool) -> Callable:
    def g(x):
        f0, f1, _ = f.jet(np.asarray(x, dtype=float))
        lam = np.abs(f0) if abs_f else f0
        return _safe(np.abs(f1) ** p, tw.h(lam))
    return g


def rhs_integrand(f: TestFunction, tw: TransformedWeight, p: float, abs_f: bool) -> Callable:
    def g(x):
        f0, _, f2 = f.jet(np.asarray(x, dtype=float))
        lam = np.abs(f0) if abs_f else f0
        with np.errstate(all="ignore"):
            core = np.abs(f2 * tw.T(lam)) ** (p / 2.0)
        return _safe(core, tw.h(lam))
    return g


def _knots(f: TestFunction, window: Interval) -> list:
    rng = sampling_range(f, window)
    pts = list(f.knots) + second_derivative_breaks(f, rng)
    if f.deriv_support is not None:
        pts += [f.deriv_support.a, f.deriv_support.b]
    return sorted({float(x) for x in pts if rng.a < x < rng.b})


def _side(g: Callable, f: TestFunction, window: Interval, restriction: str,
          deltas, abs_tol: float, rel_tol: float, knots=None, anchors=None) -> CutoffReport:
    if knots is None:
        knots = _knots(f, window)
    if anchors is None and restriction != "none":
        anchors = locate_zeros(f, window).anchors()
    return integrate_excluding(g, f, window, restriction, deltas, abs_tol, rel_tol,
                               knots, anchors)


def lhs_integral(f: TestFunction, spec: InequalitySpec) -> CutoffReport:
    return _side(lhs_integrand(f, spec.weight, spec.p, spec.abs_f), f, spec.window,
                 spec.restriction, spec.deltas, spec.abs_tol, spec.rel_tol)


def rhs_integral(f: TestFunction, spec: InequalitySpec) -> CutoffReport:
    return _side(rhs_integrand(f, spec.weight, spec.p, spec.abs_f), f, spec.window,
                 spec.restriction, spec.deltas, spec.abs_tol, spec.rel_tol)


# ---------------------------------------------------------------- boundary terms

def flux(f: TestFunction, H: Callable, p: float) -> Callable:
    """x -> |f'|^{p-2} f' H(f)."""
    def B(x):
        f0, f1, _ = f.jet(np.asarray(x, dtype=float))
        with np.errstate(all="ignore"):
            hv = np.asarray(H(f0), dtype=float)
        return _safe(np.abs(f1) ** (p - 2.0) * f1, hv)
    return B


def boundary_theta(f: TestFunction, tw: TransformedWeight, p: float, r: float, R: float
                   ) -> float:
    if not r < R:
        raise IneqError("BAD_WINDOW", f"need r < R, got {r}, {R}")
    B = flux(f, tw.Hv, p)
    vals = B(np.array([r, R], dtype=float))
    if not np.all(np.isfinite(vals)):
        raise IneqError("EVAL_FAIL", f"H(f) not finite at r={r} or R={R}")
    return float(vals[1] - vals[0])


def _selected_H(spec: InequalitySpec) -> Callable:
    """The primitive (with its extension to 0) appearing in the regime's boundary condition."""
    tw = spec.weight
    reg = spec.regime
    if reg in ("R3_real_line", "R3_general", "R4_positive"):
        return tw.Hv
    if reg == "R4_nonneg_Hcont" or (reg == "R5_double_zeroes" and spec.part == 1):
        z = tw.zero_limit
    else:
        z = 0.0
    if reg.startswith("R5"):
        def H(lam):
            lam = np.asarray(lam, dtype=float)
            return np.sign(lam) * tw.H_tilde(np.abs(lam), at_zero=z)
        return H

    def H(lam):
        return tw.H_tilde(lam, at_zero=z)
    return H


def _tail_value(f: TestFunction, window: Interval, side: str) -> Optional[float]:
    s = f.deriv_support
    if side == "a":
        if not (window.a < s.a):
            return None
        x = s.a - 0.5 * min(1.0, s.a - window.a)
    else:
        if not (s.b < window.b):
            return None
        x = s.b + 0.5 * min(1.0, window.b - s.b)
    if not f.domain.contains_open(x) and not f.domain.a <= x <= f.domain.b:
        return None
    return float(f.value(np.array([x]))[0])


# ---------------------------------------------------------------- admissibility

def _range_values(f: TestFunction, window: Interval, abs_f: bool) -> np.ndarray:
    rng = sampling_range(f, window)
    xs = np.linspace(rng.a, rng.b, 4097)
    v = f.value(xs)
    return np.abs(v) if abs_f else v


def local_finiteness(f: TestFunction, tw: TransformedWeight, p: float, window: Interval,
                     eps_grid: Sequence = EPS_GRID, deltas=None) -> tuple:
    """Per-eps outcome of int_{0<|f|<eps} |f'|^p G_h(|f|) over the window."""
    rng = sampling_range(f, window)
    zs = locate_zeros(f, window)
    base_knots = _knots(f, window)
    ls = _LevelSets(lambda x: np.abs(f.value(x)), rng, zs.anchors() + [rng.a, rng.b])
    out = []
    for eps in eps_grid:
        def g(x, eps=eps):
            f0, f1, _ = f.jet(np.asarray(x, dtype=float))
            lam = np.abs(f0)
            with np.errstate(all="ignore"):
                Gv = tw.G(lam, p)
            val = _safe(np.abs(f1) ** p, Gv)
            return np.where(lam < eps, val, 0.0)
        knots = sorted(set(base_knots + ls.breakpoints(eps)))
        rep = integrate_excluding(g, f, window, "f_nonzero", deltas, 1e-10, 1e-8, knots,
                                  zs.anchors())
        out.append((float(eps), rep.verdict.kind, rep.verdict.rate_exponent))
    return tuple(out)


def _boundary_check(spec: InequalitySpec, f: TestFunction, H: Callable):
    """Heuristic boundary estimates and whether the regime's condition looks satisfied."""
    if spec.regime == "R3_real_line":
        def expr(x):
            f0, f1, _ = f.jet(np.asarray(x, dtype=float))
            with np.errstate(all="ignore"):
                return _safe(np.abs(f1) ** (spec.p - 1.0), np.abs(H(f0)))
    else:
        B = flux(f, H, spec.p)

        def expr(x):
            x = np.asarray(x, dtype=float)
            f0 = f.value(x)
            val = B(x)
            if spec.regime.startswith("R5"):
                val = np.where(f0 == 0.0, 0.0, val)
            return val
    est_a = boundary_limit(expr, spec.window, "a")
    est_b = boundary_limit(expr, spec.window, "b")
    scale = BOUNDARY_TOL * (1.0 + max(abs(est_a.tail_sup), abs(est_b.tail_inf)))
    if spec.regime == "R3_real_line":
        ok = est_a.tail_inf <= scale and est_b.tail_inf <= scale
    elif spec.regime in _ONE_SIDED or (spec.regime == "R5_double_zeroes" and spec.part == 1):
        ok = est_b.tail_inf <= scale and est_a.tail_sup >= -scale
    else:
        ok = est_b.tail_inf - est_a.tail_sup <= scale
    return est_a, est_b, ok


def _structural(f: TestFunction, spec: InequalitySpec, flags: FunctionFlags,
                wc: Optional[WeightClass]) -> dict:
    tw = spec.weight
    reg = spec.regime
    lam = _range_values(f, spec.window, spec.abs_f)
    s: dict = {}
    s["window_in_domain"] = spec.window.intersect(f.domain) is not None
    if reg.startswith("R3"):
        with np.errstate(all="ignore"):
            hv = tw.h(lam)
        s["h_finite_on_range"] = bool(np.all(np.isfinite(hv)))
        s["zero_set_countable"] = tw.weight.zero_set_countable
        if reg == "R3_real_line":
            s["window_is_real_line"] = not spec.window.finite_a and not spec.window.finite_b
    elif reg == "R4_positive":
        rng = sampling_range(f, spec.window)
        xs = np.linspace(rng.a, rng.b, 4097)
        v = f.value(xs)
        inner = v[1:-1]
        s["f_positive"] = bool(np.all(inner > 0.0)) and (
            flags.strictly_positive or bool(np.all(v >= 0.0)))
        with np.errstate(all="ignore"):
            hv = tw.h(inner)
        s["h_positive_on_range"] = bool(np.all(hv > 0.0) and np.all(np.isfinite(hv)))
    elif reg.startswith("R4"):
        s["f_nonnegative"] = flags.nonnegative
        if reg == "R4_nonneg_Hcont":
            s["H_continuous_at_zero"] = tw.zero_limit is not None and math.isfinite(tw.zero_limit)
        else:
            s["h_bounded_or_nonincreasing"] = wc.h_ok
            s["T_half_p_h_bounded_or_nonincreasing"] = wc.T_ok
    elif reg == "R5_double_zeroes":
        s["no_single_zeroes"] = flags.no_single_zeroes
        if spec.part == 1:
            s["H_continuous_at_zero"] = tw.zero_limit is not None and math.isfinite(tw.zero_limit)
        else:
            s["h_bounded_or_nonincreasing"] = wc.h_ok
            s["T_half_p_h_bounded_or_nonincreasing"] = wc.T_ok
    elif reg == "R5_H_integrable":
        s["h_integrable_near_zero"] = wc.integrable_near_zero
        s["H_anchored_at_zero"] = tw.zero_limit == 0.0 and tw.H_tilde_zero == 0.0
    elif reg == "R5_RG":
        s["h_bounded_or_nonincreasing"] = wc.h_ok
        s["T_half_p_h_bounded_or_nonincreasing"] = wc.T_ok
        s["G_condition"] = (wc.T_half_p_h_nonincreasing_near_zero
                            or wc.G_bounded_or_nonincreasing_near_zero)
    return s


def check_admissible(f: TestFunction, spec: InequalitySpec,
                     lhs: Optional[CutoffReport] = None, rhs: Optional[CutoffReport] = None
                     ) -> AdmissibilityReport:
    flags = classify_function(f, spec.window)
    wc = None
    if not spec.regime.startswith("R3") and spec.regime != "R4_positive":
        wc = classify_weight(spec.weight, spec.p)
    structural = _structural(f, spec, flags, wc)
    rep = AdmissibilityReport("no", None, structural, None, flags, wc)
    if spec.regime == "R5_RG":
        lf = local_finiteness(f, spec.weight, spec.p, spec.window, deltas=spec.deltas)
        rep.local_finiteness = lf
        kinds = {k for _, k, _ in lf}
        if "finite_limit" in kinds:
            structural["eps_local_finiteness"] = True
        elif kinds == {"divergent"}:
            structural["eps_local_finiteness"] = False
        else:
            structural["eps_local_finiteness"] = False
            rep.notes.append("eps-local finiteness undecided on the eps grid")
    if not all(structural.values()):
        failed = [k for k, v in structural.items() if not v]
        rep.notes.append("structural requirement failed: " + ", ".join(failed))
        return rep
    if spec.regime == "R4_positive" and spec.with_defect:
        rep.member = "yes"
        rep.sufficient_condition_used = "defect_term"
        return rep

    H = _selected_H(spec)
    if f.deriv_support is not None:
        ta = _tail_value(f, spec.window, "a")
        tb = _tail_value(f, spec.window, "b")
        if ta is not None and tb is not None:
            lam = np.array([ta, tb], dtype=float)
            with np.errstate(all="ignore"):
                hv = np.asarray(H(np.abs(lam) if spec.abs_f and not spec.regime.startswith("R5")
                                  else lam), dtype=float)
            if np.all(np.isfinite(hv)):
                rep.member = "yes"
                rep.sufficient_condition_used = "deriv_support_bounded"
                return rep
    try:
        est_a, est_b, ok = _boundary_check(spec, f, H)
    except QuadError as e:
        rep.member = "heuristic_no"
        rep.notes.append(str(e))
        return rep
    rep.boundary = (est_a, est_b)
    rep.member = "heuristic_yes" if ok else "heuristic_no"
    if spec.regime == "R3_real_line" and not ok and lhs is not None and rhs is not None:
        if lhs.finite and rhs.finite:
            rep.member = "heuristic_yes"
            rep.sufficient_condition_used = "both_integrals_finite"
    rep.notes.append("boundary condition estimated from a geometric tail (heuristic)")
    return rep


def defect_estimate(f: TestFunction, spec: InequalitySpec, adm: AdmissibilityReport
                    ) -> Optional[float]:
    """Heuristic liminf_b B - limsup_a B; exactly 0 when f' vanishes near both ends."""
    if adm.sufficient_condition_used == "deriv_support_bounded":
        return 0.0
    if adm.boundary is not None:
        est_a, est_b = adm.boundary
    else:
        try:
            est_a, est_b, _ = _boundary_check(
                InequalitySpec(spec.weight, spec.p, spec.window, "R3_general"), f,
                _selected_H(spec))
        except QuadError:
            return math.nan
        adm.boundary = (est_a, est_b)
    return est_b.tail_inf - est_a.tail_sup


# ---------------------------------------------------------------- verdicts

def decide(lhs: CutoffReport, rhs: CutoffReport, C: float, defect: Optional[float],
           member: str, tol_rel: float = DEFAULT_TOL_REL, tol_abs: float = 0.0):
    """(pass, slack, tolerance) for lhs <= C*rhs + defect."""
    d = 0.0 if defect is None else defect
    lk, rk = lhs.verdict.kind, rhs.verdict.kind
    if "inconclusive" in (lk, rk) or (defect is not None and not math.isfinite(defect)):
        return "inconclusive", math.nan, math.nan
    if lk == "divergent" and rk == "divergent":
        return "inconclusive", math.nan, math.inf
    if rk == "divergent":
        return "holds", math.inf, 0.0
    if lk == "divergent":
        return ("violated" if member in ("yes", "heuristic_yes") else "inconclusive"), \
            -math.inf, 0.0
    L, R = lhs.value, rhs.value
    tol = tol_rel * max(abs(L), C * abs(R), abs(d)) + tol_abs + 3.0 * (lhs.error + C * rhs.error)
    slack = C * R + d - L
    if slack >= -tol:
        return "holds", slack, tol
    return ("violated" if member in ("yes", "heuristic_yes") else "inconclusive"), slack, tol


def _label(f: TestFunction, spec: InequalitySpec, **extra) -> dict:
    out = {"function": f.label, "weight": spec.weight.weight.label,
           "anchor": spec.weight.anchor, "p": spec.p, "regime": spec.regime,
           "window_a": spec.window.a, "window_b": spec.window.b}
    out.update(extra)
    return out


def verify(f: TestFunction, spec: InequalitySpec) -> Verdict:
    if not math.isfinite(spec.p):
        raise IneqError("BAD_PARAMS", "p = infinity is handled by sup_variant")
    lhs = lhs_integral(f, spec)
    rhs = rhs_integral(f, spec)
    adm = check_admissible(f, spec, lhs, rhs)
    defect = None
    if spec.with_defect:
        defect = defect_estimate(f, spec, adm)
    passed, slack, tol = decide(lhs, rhs, spec.C, defect, adm.member, spec.tol_rel,
                                spec.tol_abs)
    notes = []
    if adm.member.startswith("heuristic"):
        notes.append("admissibility is heuristic")
    return Verdict(lhs, rhs, spec.C, defect, adm, passed, slack, tol, _label(f, spec), notes)


def verify_windowed(f: TestFunction, spec: InequalitySpec, r: float, R: float) -> Verdict:
    """lhs <= C*rhs + theta(r, R) on [r, R]; unconditional, so no class membership check."""
    if not (r < R) or not (spec.window.a <= r and R <= spec.window.b):
        raise IneqError("BAD_WINDOW", f"[{r}, {R}] not inside {spec.window}")
    sub = InequalitySpec(spec.weight, spec.p, Interval(r, R), "R3_general", spec.use_abs_f,
                         False, spec.part, spec.constant, spec.tol_rel, spec.tol_abs,
                         spec.abs_tol, spec.rel_tol, spec.deltas)
    g_l = lhs_integrand(f, sub.weight, sub.p, spec.use_abs_f)
    g_r = rhs_integrand(f, sub.weight, sub.p, spec.use_abs_f)
    lhs = _side(g_l, f, sub.window, "none", None, sub.abs_tol, sub.rel_tol)
    rhs = _side(g_r, f, sub.window, "none", None, sub.abs_tol, sub.rel_tol)
    theta = boundary_theta(f, spec.weight, spec.p, r, R)
    adm = AdmissibilityReport("yes", None, {"windowed": True}, "windowed_identity")
    passed, slack, tol = decide(lhs, rhs, sub.C, theta, "yes", sub.tol_rel, sub.tol_abs)
    return Verdict(lhs, rhs, sub.C, theta, adm, passed, slack, tol,
                   _label(f, sub, regime="windowed", r=r, R=R))


# ---------------------------------------------------------------- specializations

def _custom_side(g, f, window, restriction="f_nonzero", deltas=None, abs_tol=1e-10,
                 rel_tol=1e-8) -> CutoffReport:
    return _side(g, f, window, restriction, deltas, abs_tol, rel_tol)


def power_lhs(f, theta, p) -> Callable:
    def g(x):
        f0, f1, _ = f.jet(np.asarray(x, dtype=float))
        with np.errstate(all="ignore"):
            w = np.abs(f0) ** (-theta * p)
        return _safe(np.abs(f1) ** p, w)
    return g


def power_rhs(f, theta, p) -> Callable:
    def g(x):
        f0, _, f2 = f.jet(np.asarray(x, dtype=float))
        with np.errstate(all="ignore"):
            w = np.abs(f0) ** (-theta * p)
        return _safe(np.abs(f0 * f2) ** (p / 2.0), w)
    return g


def power_constant(theta: float, p: float) -> float:
    return ((p - 1.0) / abs(1.0 - theta * p)) ** (p / 2.0)


def specialize_power(f: TestFunction, theta: float, p: float, variant: str,
                     window: Optional[Interval] = None, check: bool = True) -> Verdict:
    """Weight lambda^{-theta p}: integrals of (|f'|/|f|^theta)^p and (sqrt|f f''|/|f|^theta)^p
    over {f != 0}, constant ((p-1)/|1-theta p|)^{p/2}."""
    window = f.domain if window is None else window
    if abs(1.0 - theta * p) < 1e-14:
        raise IneqError("SINGULAR_PARAMS", "theta*p = 1 belongs to the logarithmic weight")
    w = registry("power", theta=theta, p=p)
    flags = classify_function(f, window)
    if variant == "case1":
        if not theta < 1.0 / p:
            raise IneqError("HYPOTHESIS_FAIL", "case 1 needs theta < 1/p")
        tw = make_primitive(w, "zero_anchored", p)
        spec = InequalitySpec(tw, p, window, "R5_H_integrable", True)
    elif variant == "case2":
        if not (theta > 1.0 / p and flags.no_single_zeroes):
            raise IneqError("HYPOTHESIS_FAIL", "case 2 needs theta > 1/p and no single zeros")
        tw = make_primitive(w, "closed_form", p)
        spec = InequalitySpec(tw, p, window, "R5_double_zeroes", True, part=2)
    elif variant == "case3":
        if not theta > 1.0 / p:
            raise IneqError("HYPOTHESIS_FAIL", "case 3 needs theta > 1/p")
        tw = make_primitive(w, "closed_form", p)
        spec = InequalitySpec(tw, p, window, "R5_RG", True)
    else:
        raise IneqError("BAD_PARAMS", f"unknown variant {variant!r}")
    adm = check_admissible(f, spec)
    if check and variant == "case3" and not adm.structural.get("eps_local_finiteness"):
        raise IneqError("HYPOTHESIS_FAIL", "eps-local finiteness not certified")
    lhs = _custom_side(power_lhs(f, theta, p), f, window)
    rhs = _custom_side(power_rhs(f, theta, p), f, window)
    C = power_constant(theta, p)
    passed, slack, tol = decide(lhs, rhs, C, None, adm.member)
    return Verdict(lhs, rhs, C, None, adm, passed, slack, tol,
                   _label(f, spec, variant=variant, theta=theta))


def log_variant(f: TestFunction, p: float, window: Optional[Interval] = None) -> Verdict:
    """h = 1/lambda, H = ln lambda."""
    window = f.domain if window is None else window
    tw = make_primitive(registry("log_reciprocal"), "closed_form", p)
    flags = classify_function(f, window)
    if flags.nonnegative:
        regime = "R4_nonneg_monotone"
    elif flags.no_single_zeroes:
        regime = "R5_double_zeroes"
    else:
        regime = "R5_RG"
    spec = InequalitySpec(tw, p, window, regime, True)
    v = verify(f, spec)
    if regime == "R5_RG" and not v.admissibility.structural.get("eps_local_finiteness"):
        raise IneqError("HYPOTHESIS_FAIL", "eps-local finiteness not certified")
    return v


def exp_lhs(f, alpha, beta, p) -> Callable:
    def g(x):
        f0, f1, _ = f.jet(np.asarray(x, dtype=float))
        a = np.abs(f0)
        with np.errstate(all="ignore"):
            w = a ** (beta - 1.0) * np.exp(alpha * a**beta)
        return _safe(np.abs(f1) ** p, w)
    return g


def exp_rhs(f, alpha, beta, p) -> Callable:
    def g(x):
        f0, _, f2 = f.jet(np.asarray(x, dtype=float))
        a = np.abs(f0)
        with np.errstate(all="ignore"):
            w = a ** ((p / 2.0 - 1.0) * (1.0 - beta)) * np.exp(alpha * a**beta)
        return _safe(np.abs(f2) ** (p / 2.0), w)
    return g


def exp_constant(alpha: float, beta: float, p: float) -> float:
    return math.sqrt((p - 1.0) / (abs(alpha) * beta)) ** p


def exp_variant(f: TestFunction, p: float, alpha: float, beta: float, case: int,
                window: Optional[Interval] = None) -> Verdict:
    """h = lambda^{beta-1} e^{alpha lambda^beta} with the exponential primitive."""
    window = f.domain if window is None else window
    if alpha == 0.0 or beta < 1.0:
        raise IneqError("SINGULAR_PARAMS", "exponential weight needs alpha != 0 and beta >= 1")
    C = exp_constant(alpha, beta, p)
    notes = []
    flags = classify_function(f, window)
    if case == 1:
        tw = make_primitive(registry("exponential", alpha=alpha, beta=beta), "closed_form", p)
        if flags.nonnegative:
            regime = "R4_nonneg_monotone"
        elif flags.no_single_zeroes:
            regime = "R5_double_zeroes"
        else:
            regime = "R5_RG"
        spec = InequalitySpec(tw, p, window, regime, True)
        adm = check_admissible(f, spec)
        if regime == "R5_RG" and not adm.structural.get("eps_local_finiteness"):
            raise IneqError("HYPOTHESIS_FAIL", "eps-local finiteness not certified")
    elif case == 2:
        if alpha > 0:
            tw = make_primitive(registry("exponential", alpha=alpha, beta=beta, shifted=True),
                                "closed_form", p)
            spec = InequalitySpec(tw, p, window, "R5_H_integrable", True)
            adm = check_admissible(f, spec)
            H = make_primitive(registry("exponential", alpha=alpha, beta=beta), "closed_form")
            lam = _range_values(f, window, True)
            lam = lam[lam > 0]
            dom = bool(np.all(np.abs(tw.Hv(lam)) < H.Hv(lam)))
            notes.append(f"|H1(|f|)| < H(|f|) on samples: {dom}")
            if not dom:
                raise IneqError("HYPOTHESIS_FAIL", "shifted primitive not dominated")
        elif beta == 1.0:
            tw = make_primitive(registry("exponential", alpha=alpha, beta=1.0), "closed_form", p)
            regime = "R3_real_line" if not window.finite_a and not window.finite_b \
                else "R3_general"
            spec = InequalitySpec(tw, p, window, regime, False)
            adm = check_admissible(f, spec)
            notes.append("beta = 1 with alpha < 0: unrestricted weight e^{alpha f}")
            lhs = lhs_integral(f, spec)
            rhs = rhs_integral(f, spec)
            passed, slack, tol = decide(lhs, rhs, gn_constant(p), None, adm.member)
            return Verdict(lhs, rhs, gn_constant(p), None, adm, passed, slack, tol,
                           _label(f, spec, case=case), notes)
        else:
            raise IneqError("HYPOTHESIS_FAIL", "case 2 needs alpha > 0 or beta = 1")
    else:
        raise IneqError("BAD_PARAMS", f"unknown case {case!r}")
    lhs = _custom_side(exp_lhs(f, alpha, beta, p), f, window)
    rhs = _custom_side(exp_rhs(f, alpha, beta, p), f, window)
    passed, slack, tol = decide(lhs, rhs, C, None, adm.member)
    return Verdict(lhs, rhs, C, None, adm, passed, slack, tol, _label(f, spec, case=case), notes)


# ---------------------------------------------------------------- p = infinity

@dataclass
class SupEstimate:
    value: float
    divergent: bool
    argmax: float
    rate_exponent: Optional[float] = None
    samples: int = 0


def _sup(q: Callable, xs: np.ndarray, targets: Sequence, rng: Interval) -> SupEstimate:
    vals = q(xs)
    ok = np.isfinite(vals)
    best = float(np.max(vals[ok])) if np.any(ok) else 0.0
    arg = float(xs[ok][np.argmax(vals[ok])]) if np.any(ok) else math.nan
    n = xs.size
    step = (rng.b - rng.a) / max(xs.size - 1, 1)
    divergent, rate = False, None
    j = np.arange(0, 40, dtype=float)
    for z in targets:
        for sgn in (-1.0, 1.0):
            d = step * 2.0**-j
            d = d[d >= 1e-12 * max(1.0, rng.length)]
            pts = z + sgn * d
            keep = (pts > rng.a) & (pts < rng.b)
            if not np.any(keep):
                continue
            dd, pv = d[keep], q(pts[keep])
            n += pv.size
            good = np.isfinite(pv) & (pv > 0)
            if np.sum(good) >= 8:
                tail_d, tail_v = dd[good][-8:], pv[good][-8:]
                slope, r2 = _fit(np.log(tail_d), np.log(tail_v))
                if slope < -0.05 and r2 > 0.99 and np.all(np.diff(tail_v) > 0):
                    divergent = True
                    rate = -slope if rate is None else max(rate, -slope)
            if np.any(good):
                i = int(np.argmax(np.where(good, pv, -np.inf)))
                if pv[i] > best:
                    best, arg = float(pv[i]), float(pts[keep][i])
    if not divergent and np.any(ok):
        order = np.argsort(np.where(ok, vals, -np.inf))[-5:]
        for i in order:
            lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
            if hi <= lo:
                continue
            res = minimize_scalar(lambda x: -float(q(np.array([x]))[0]), bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-13})
            n += res.nfev
            if np.isfinite(res.fun) and -res.fun > best:
                best, arg = float(-res.fun), float(res.x)
    return SupEstimate(math.inf if divergent else best, divergent, arg, rate, n)


def _sup_report(est: SupEstimate) -> CutoffReport:
    kind = "divergent" if est.divergent else "finite_limit"
    v = CutoffVerdict(kind, est.value, 0.0 if not est.divergent else math.inf,
                      rate_exponent=est.rate_exponent,
                      note=f"sup over {est.samples} samples, argmax {est.argmax:.6g}")
    return CutoffReport([(0.0, est.value)], v, "f_nonzero", 0.0, ["sampled"], {})


def sup_variant(f: TestFunction, theta: float, window: Optional[Interval] = None,
                require_hypothesis: bool = True, grid: int = 20001) -> Verdict:
    """|| f'/|f|^theta ||_inf <= theta^{-1/2} || sqrt|f f''| / |f|^theta ||_inf over {f != 0}."""
    window = f.domain if window is None else window
    if not theta > 0:
        raise IneqError("SINGULAR_PARAMS", "sup-norm constant 1/sqrt(theta) needs theta > 0")
    flags = classify_function(f, window)
    if require_hypothesis and not flags.no_single_zeroes:
        raise IneqError("HYPOTHESIS_FAIL", "theta > 0 needs f >= 0 or no single zeros")
    rng = sampling_range(f, window)
    xs = np.linspace(rng.a, rng.b, grid)
    zs = locate_zeros(f, window)
    targets = sorted(set(zs.anchors() + [rng.a, rng.b]))

    def masked(expr):
        def q(x):
            x = np.asarray(x, dtype=float)
            f0, f1, f2 = f.jet(x)
            with np.errstate(all="ignore"):
                v = expr(f0, f1, f2) / np.abs(f0) ** theta
            return np.where(f0 != 0.0, v, np.nan)
        return q

    lq = masked(lambda f0, f1, f2: np.abs(f1))
    rq = masked(lambda f0, f1, f2: np.sqrt(np.abs(f0 * f2)))
    lhs = _sup_report(_sup(lq, xs, targets, rng))
    rhs = _sup_report(_sup(rq, xs, targets, rng))
    C = 1.0 / math.sqrt(theta)
    member = "heuristic_yes" if flags.no_single_zeroes else "no"
    adm = AdmissibilityReport(member, None, {"no_single_zeroes": flags.no_single_zeroes},
                              "deriv_support_bounded" if f.deriv_support else None, flags)
    passed, slack, tol = decide(lhs, rhs, C, None, member)
    lab = {"function": f.label, "weight": f"power(theta={theta:g})", "anchor": "closed_form",
           "p": math.inf, "regime": "sup_norm", "window_a": window.a, "window_b": window.b}
    return Verdict(lhs, rhs, C, None, adm, passed, slack, tol, lab)


# ---------------------------------------------------------------- counterexample

@dataclass
class CounterexampleCase:
    p: float
    theta: float
    lhs: CutoffReport
    rhs: CutoffReport
    constant: float
    expected_lhs: str
    expected_rhs: str
    rate_target: Optional[float]
    passed: str
    checks: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


@dataclass
class CounterexampleReport:
    cases: list
    lower_bound_min_margin: dict
    literal_bound_holds: dict
    sup_diagnostic: dict

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cases)


def lower_bound_check(theta: float, n: int = 2001) -> tuple:
    """Min over sampled x in (-1/8, 1/8) of |f'|/|f|^theta minus the pointwise lower bound,
    for the corrected bound pi sqrt2 (2 pi)^{-theta} |x|^{-theta} and the bound without the
    (2 pi)^{-theta} factor."""
    f = build_family("sine_bump")
    xs = np.linspace(-0.125, 0.125, n + 2)[1:-1]
    xs = xs[xs != 0.0]
    f0, f1, _ = f.jet(xs)
    q = np.abs(f1) / np.abs(f0) ** theta
    corrected = math.pi * math.sqrt(2.0) * (2.0 * math.pi) ** -theta / np.abs(xs) ** theta
    literal = math.pi * math.sqrt(2.0) / np.abs(xs) ** theta
    return float(np.min(q - corrected)), bool(np.all(q >= literal))


def counterexample_run(cases: Sequence = ((4.0, 0.3), (4.0, 0.5), (4.0, 0.1)),
                       sup_thetas: Sequence = (0.3,)) -> CounterexampleReport:
    f = build_family("sine_bump")
    window = f.domain
    knots = _knots(f, window)
    anchors = locate_zeros(f, window).anchors()
    out = []
    margins, literal = {}, {}
    for p, theta in cases:
        lhs = _side(power_lhs(f, theta, p), f, window, "f_nonzero", None, 1e-10, 1e-8,
                    knots, anchors)
        rhs = _side(power_rhs(f, theta, p), f, window, "f_nonzero", None, 1e-10, 1e-8,
                    knots, anchors)
        C = power_constant(theta, p)
        exp_l = "divergent" if theta * p > 1.0 else "finite_limit"
        exp_r = "finite_limit" if theta <= 0.5 else "divergent"
        target = theta * p - 1.0 if exp_l == "divergent" else None
        checks = {"lhs_kind": lhs.verdict.kind == exp_l, "rhs_kind": rhs.verdict.kind == exp_r}
        if target is not None and lhs.verdict.rate_exponent is not None:
            checks["rate_within_10pct"] = abs(lhs.verdict.rate_exponent - target) <= 0.1 * target
        elif target is not None:
            checks["rate_within_10pct"] = False
        passed, _, _ = decide(lhs, rhs, C, None, "no")
        if exp_l == "finite_limit":
            checks["inequality_holds"] = passed == "holds"
        m, lit = lower_bound_check(theta)
        margins[theta] = m
        literal[theta] = lit
        checks["lower_bound"] = m >= 0.0
        out.append(CounterexampleCase(p, theta, lhs, rhs, C, exp_l, exp_r, target, passed,
                                      checks))
    sup = {}
    for theta in sup_thetas:
        v = sup_variant(f, theta, require_hypothesis=False)
        sup[theta] = {"lhs_divergent": v.lhs.verdict.kind == "divergent",
                      "rhs_sup": v.rhs.value}
    return CounterexampleReport(out, margins, literal, sup)


# ---------------------------------------------------------------- serialization

ROW_FIELDS = ("function", "weight", "anchor", "p", "regime", "window_a", "window_b",
              "lhs", "lhs_err", "lhs_kind", "lhs_rate", "rhs", "rhs_err", "rhs_kind",
              "constant", "defect", "slack", "tolerance", "member", "sufficient_condition",
              "pass")


def verdict_row(v: Verdict) -> dict:
    lab = v.label
    return {
        "function": lab.get("function", ""), "weight": lab.get("weight", ""),
        "anchor": lab.get("anchor", ""), "p": lab.get("p", math.nan),
        "regime": lab.get("regime", ""), "window_a": lab.get("window_a", math.nan),
        "window_b": lab.get("window_b", math.nan),
        "lhs": v.lhs.value, "lhs_err": v.lhs.error, "lhs_kind": v.lhs.verdict.kind,
        "lhs_rate": v.lhs.verdict.rate_exponent if v.lhs.verdict.rate_exponent is not None
        else math.nan,
        "rhs": v.rhs.value, "rhs_err": v.rhs.error, "rhs_kind": v.rhs.verdict.kind,
        "constant": v.constant, "defect": v.defect if v.defect is not None else 0.0,
        "slack": v.slack, "tolerance": v.tolerance, "member": v.admissibility.member,
        "sufficient_condition": v.admissibility.sufficient_condition_used or "",
        "pass": v.passed,
    }


def _jsonable(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return _jsonable(float(x))
    return x


def _cutoff_tree(c: CutoffReport) -> dict:
    return {"schedule": [[d, v] for d, v in c.schedule], "verdict": asdict(c.verdict),
            "restriction": c.restriction, "quad_error": c.quad_error,
            "tolerances": dict(c.tolerances or {})}


def _boundary_tree(b: Optional[BoundaryEstimate]):
    if b is None:
        return None
    return {"endpoint": b.endpoint, "tail_inf": b.tail_inf, "tail_sup": b.tail_sup,
            "heuristic": b.heuristic}


def verdict_tree(v: Verdict) -> dict:
    a = v.admissibility
    tree = {
        "inputs": dict(v.label),
        "lhs": _cutoff_tree(v.lhs), "rhs": _cutoff_tree(v.rhs),
        "constant": v.constant, "defect": v.defect,
        "admissibility": {
            "member": a.member, "sufficient_condition": a.sufficient_condition_used,
            "structural": dict(a.structural),
            "boundary": [_boundary_tree(b) for b in a.boundary] if a.boundary else None,
            "local_finiteness": [list(t) for t in a.local_finiteness],
            "notes": list(a.notes),
        },
        "pass": v.passed, "slack": v.slack, "tolerance": v.tolerance, "notes": list(v.notes),
    }
    return _jsonable(tree)


__all__ = [
    "REGIMES", "IneqError", "InequalitySpec", "AdmissibilityReport", "Verdict",
    "gn_constant", "lhs_integral", "rhs_integral", "boundary_theta", "check_admissible",
    "verify", "verify_windowed", "specialize_power", "sup_variant", "log_variant",
    "exp_variant", "counterexample_run", "lower_bound_check", "local_finiteness",
    "power_constant", "exp_constant", "decide", "verdict_row", "verdict_tree", "ROW_FIELDS",
    "flux", "lhs_integrand", "rhs_integrand", "defect_estimate",
]
