"""Recompute the frozen reference values in frozen.json from the oracles.

Run by hand (python3 tests/freeze_oracles.py); the test suite only reads the JSON.
"""

import json
import math
from pathlib import Path

import mpmath as mp
import sympy as sp

import oracles as o

mp.mp.dps = 30


def bump(k):
    return lambda t: (1 - t * t) ** k if abs(t) < 1 else mp.mpf(0)


def profile(t):
    return t * t * (1 - t) ** 2


def d(fn, t, n):
    return mp.diff(fn, t, n)


def sine_bump(t):
    return o.sine_bump_phi(t) * mp.sin(2 * mp.pi * t)


def main():
    out = {}
    lhs, rhs = o.poly_bump_exact()
    out["poly_bump_unit_p2"] = {"lhs": float(lhs), "rhs": float(rhs)}

    w_l, w_r, w_t = o.windowed_parabola_exact()
    out["windowed_parabola"] = {"lhs": float(w_l), "rhs": float(w_r), "theta": float(w_t)}

    # power weight theta = -1, p = 4 on poly_bump(2): h = f^4, T = f/5
    f = bump(2)
    pts = [-1, 1 / mp.sqrt(3), -1 / mp.sqrt(3), 0, 1]
    pts = sorted(pts)
    lhs = o.mquad(lambda t: d(f, t, 1) ** 4 * f(t) ** 4, -1, 1, pts[1:-1])
    rhs = o.mquad(lambda t: (d(f, t, 2) * f(t) / 5) ** 2 * f(t) ** 4, -1, 1, pts[1:-1])
    out["power_theta_m1_p4_poly_bump"] = {"lhs": lhs, "rhs": rhs, "constant": 0.36}

    # theta = 1/2, p = 4 on power_profile(2): h = f^-2, T = -f
    lhs = o.mquad(lambda t: d(profile, t, 1) ** 4 / profile(t) ** 2, 0, 1, [0.5])
    rhs = o.mquad(lambda t: (d(profile, t, 2) * profile(t)) ** 2 / profile(t) ** 2, 0, 1,
                  [0.5 - mp.sqrt(3) / 6, 0.5 + mp.sqrt(3) / 6])
    out["power_theta_half_p4_profile"] = {"lhs": lhs, "rhs": rhs, "constant": 9.0}

    # sup variant theta = 1/2 on power_profile(2): f'/sqrt(f) = 2(1-2x) sign-adjusted and
    # sqrt|f f''|/sqrt(f) = sqrt|2 - 12x + 12x^2|, both maximal as x -> 0 or 1
    g1 = sp.Abs(sp.diff(o.x**2 * (1 - o.x)**2, o.x)) / (o.x * (1 - o.x))
    g2 = sp.sqrt(sp.Abs(sp.diff(o.x**2 * (1 - o.x)**2, o.x, 2)))
    out["sup_theta_half_profile"] = {"lhs": float(sp.limit(sp.simplify(g1), o.x, 0, "+")),
                                     "rhs": float(sp.limit(g2, o.x, 0, "+")),
                                     "constant": math.sqrt(2.0)}

    # log weight p = 2 on power_profile(2)
    out["log_p2_profile"] = {
        "lhs": float(o.power_profile_log_lhs()),
        "rhs": o.mquad(lambda t: abs(d(profile, t, 2) * mp.log(profile(t))), 0, 1,
                       [0.5 - mp.sqrt(3) / 6, 0.5 + mp.sqrt(3) / 6]),
    }

    # exponential alpha = beta = 1, p = 2 on poly_bump(2), H = e^lam
    lhs = o.mquad(lambda t: d(f, t, 1) ** 2 * mp.e ** f(t), -1, 1, pts[1:-1])
    rhs = o.mquad(lambda t: abs(d(f, t, 2)) * mp.e ** f(t), -1, 1, pts[1:-1])
    out["exp_a1_b1_p2_poly_bump"] = {"lhs": lhs, "rhs": rhs}

    # eigen fixture: f = 1 + x(1-x), tau = lam, q = 2
    def par(t):
        return 1 + t * (1 - t)
    lhs = o.mquad(lambda t: 9 * d(par, t, 1) ** 4 / par(t) ** 4, 0, 1, [0.5])
    gq = o.mquad(lambda t: (2 / par(t)) ** 2, 0, 1)
    sem = o.holder_seminorm_bruteforce(lambda t: math.sqrt(3) * math.log(1 + t * (1 - t)),
                                       0.0, 1.0, 0.75)
    out["eig_parabola_q2_a1"] = {"lhs_i": lhs, "bound_i": 9 * gq,
                                 "holder_bound": math.sqrt(3) * gq ** 0.25,
                                 "holder_seminorm_grid600": sem}

    # counterexample: h = |f|^(-theta p), T = f/(1 - theta p); rhs includes the T factor
    cut = [-1, -0.5, 0, 0.5, 1]

    def sl(theta, p):
        return lambda t: abs(d(sine_bump, t, 1)) ** p * abs(sine_bump(t)) ** (-theta * p) \
            if sine_bump(t) != 0 else mp.mpf(0)

    def sr(theta, p):
        return lambda t: abs(d(sine_bump, t, 2) * sine_bump(t) / (1 - theta * p)) ** (p / 2) \
            * abs(sine_bump(t)) ** (-theta * p) if sine_bump(t) != 0 else mp.mpf(0)
    out["counterexample"] = {}
    for theta in (0.1, 0.3, 0.5):
        entry = {"rhs": o.mquad(sr(theta, 4), -1, 1, cut[1:-1])}
        if theta == 0.1:
            entry["lhs"] = o.mquad(sl(theta, 4), -1, 1, cut[1:-1])
        out["counterexample"][str(theta)] = entry

    tf = o.thomas_fermi_rk4()
    out["thomas_fermi_rk4_n4000"] = {"y1": tf[0], "yp1": tf[1]}
    Path(__file__).with_name("frozen.json").write_text(json.dumps(out, indent=2) + "\n")
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
