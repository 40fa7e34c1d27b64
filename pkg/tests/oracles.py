"""Reference computations that share no code with the package.

Exact values come from sympy, numeric references from mpmath quadrature at 30
digits, and ODE references from a fixed-step classical RK4 loop written here.
"""

import math

import mpmath as mp
import sympy as sp

mp.mp.dps = 30
x = sp.Symbol("x", real=True)
lam = sp.Symbol("lam", positive=True)


# ---------------------------------------------------------------- exact fixtures

def poly_bump_exact():
    """h = 1, p = 2, f = (1-x^2)^2: lhs = int f'^2, rhs = int |f f''|."""
    f = (1 - x**2) ** 2
    lhs = sp.integrate(sp.diff(f, x) ** 2, (x, -1, 1))
    ff2 = sp.expand(f * sp.diff(f, x, 2))
    r = 1 / sp.sqrt(3)
    # f'' = 12x^2 - 4 changes sign at +-1/sqrt(3)
    rhs = (sp.integrate(-ff2, (x, -r, r)) + 2 * sp.integrate(ff2, (x, r, 1)))
    return sp.nsimplify(lhs), sp.simplify(rhs)


def windowed_parabola_exact():
    """f = 1 + x(1-x), h = 1, p = 2 on [1/4, 3/4]."""
    f = 1 + x * (1 - x)
    r, R = sp.Rational(1, 4), sp.Rational(3, 4)
    f1 = sp.diff(f, x)
    lhs = sp.integrate(f1**2, (x, r, R))
    rhs = sp.integrate(2 * f, (x, r, R))  # |f f''| = 2 f since f > 0, f'' = -2
    theta = (f1 * f).subs(x, R) - (f1 * f).subs(x, r)
    return lhs, rhs, theta


def power_profile_log_lhs():
    """int_0^1 f'^2 / f for f = x^2 (1-x)^2."""
    f = x**2 * (1 - x) ** 2
    return sp.integrate(sp.simplify(sp.diff(f, x) ** 2 / f), (x, 0, 1))


def power_transforms_symbolic(alpha, q):
    """Generic transform pipeline applied symbolically to tau = lam^alpha."""
    alpha = sp.nsimplify(alpha)
    q = sp.nsimplify(q)
    tau = lam**alpha
    if q == 1:
        h = sp.simplify(sp.Abs(sp.diff(tau, lam)) / tau**2)
        H = -sp.sign(sp.diff(tau, lam).subs(lam, 1)) / tau
        G = sp.integrate(sp.sqrt(h), lam)
        return {"h": h, "H": H, "G": G}
    k = tau ** (q / (q - 1))
    K = sp.integrate(k, lam)
    sK = sp.sign(K.subs(lam, 1))
    h = sp.simplify((q - 1) ** q * (sK * K) ** (-q) * k)
    H = sp.simplify(-sK * (q - 1) ** (q - 1) * (sK * K) ** (1 - q))
    G = sp.integrate(sp.powsimp(h ** (1 / (2 * q)), force=True), lam)
    return {"k": k, "K": K, "h": h, "H": H, "G": G}


def manufactured_g(expr, alpha):
    f = sp.sympify(expr, locals={"x": x})
    return sp.simplify(sp.diff(f, x, 2) / f ** sp.nsimplify(alpha))


# ---------------------------------------------------------------- numeric references

def mquad(fn, a, b, points=()):
    pts = [a, *points, b]
    return float(mp.quad(fn, pts))


def sine_bump_phi(t):
    """phi from the standard exp smooth step: 1 on [-1/2, 1/2], 0 outside (-1, 1)."""
    def psi(s):
        return mp.e ** (-1 / s) if s > 0 else mp.mpf(0)

    def S(s):
        return psi(s) / (psi(s) + psi(1 - s))
    u = 2 - 2 * abs(t)
    if u >= 1:
        return mp.mpf(1)
    if u <= 0:
        return mp.mpf(0)
    return S(u)


def rk4(rhs, t0, y0, t1, n):
    """Classical fixed-step RK4 for a first-order system given as lists."""
    h = (t1 - t0) / n
    t, y = t0, list(y0)
    for _ in range(n):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, [a + h / 2 * b for a, b in zip(y, k1)])
        k3 = rhs(t + h / 2, [a + h / 2 * b for a, b in zip(y, k2)])
        k4 = rhs(t + h, [a + h * b for a, b in zip(y, k3)])
        y = [a + h / 6 * (b + 2 * c + 2 * d + e) for a, b, c, d, e in zip(y, k1, k2, k3, k4)]
        t += h
    return y


def thomas_fermi_rk4(t0=0.1, y0=1.0, yp0=0.0, t1=1.0, n=4000):
    return rk4(lambda t, y: [y[1], math.sqrt(t) * y[0] ** 1.5], t0, [y0, yp0], t1, n)


def holder_seminorm_bruteforce(F, a, b, gamma, n=600):
    xs = [a + (b - a) * i / (n - 1) for i in range(n)]
    vals = [F(t) for t in xs]
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            q = abs(vals[i] - vals[j]) / (xs[j] - xs[i]) ** gamma
            best = max(best, q)
    return best
