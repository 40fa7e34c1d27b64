import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gnverify.funcspace import Interval, build_family
from gnverify.quad import (QuadError, boundary_limit, cutoff_integral, default_schedule,
                           extrapolate_cutoff, integrate, integrate_excluding,
                           integrate_improper)

R = Interval(-math.inf, math.inf)
U = Interval(0.0, 1.0)


def test_x_squared():
    r = integrate(lambda x: x * x, U, 1e-12, 1e-12)
    assert r.converged and abs(r.value - 1.0 / 3.0) < 1e-12


def test_poly_bump_pieces(frozen):
    r = integrate(lambda x: 16 * x**2 * (1 - x**2) ** 2, Interval(-1.0, 1.0))
    assert abs(r.value - frozen["poly_bump_unit_p2"]["lhs"]) < 1e-12
    s = 1 / math.sqrt(3)
    r = integrate(lambda x: (1 - x**2) ** 2 * np.abs(12 * x**2 - 4), Interval(-1.0, 1.0),
                  knots=[-s, s])
    assert abs(r.value - frozen["poly_bump_unit_p2"]["rhs"]) < 1e-10


def test_improper_examples():
    r = integrate_improper(lambda x: np.exp(-x * x), R)
    assert abs(r.value - math.sqrt(math.pi)) < 1e-10
    r = integrate_improper(lambda x: x**-2.0, Interval(1.0, math.inf))
    assert abs(r.value - 1.0) < 1e-10

    def bump(x):
        return np.where(np.abs(x) < 1, (1 - x * x) ** 2, 0.0)
    a = integrate_improper(bump, R, knots=[-1.0, 1.0]).value
    b = integrate(bump, Interval(-1.0, 1.0)).value
    assert abs(a - b) < 1e-10


def test_infinite_window_rejected():
    with pytest.raises(QuadError):
        integrate(lambda x: x, R)


CLOSED = [
    (lambda x: x**3, 0, 1, 0.25), (lambda x: x**7 - x, -1, 2, 255.0 / 8 - 1.5),
    (lambda x: np.exp(-x * x), -3, 3, math.sqrt(math.pi) * math.erf(3)),
    (lambda x: x**-0.5, 0, 1, 2.0), (np.sin, 0, math.pi, 2.0), (np.cos, 0, 10, math.sin(10)),
    (lambda x: 1 / (1 + x * x), -5, 5, 2 * math.atan(5)), (np.exp, 0, 3, math.e**3 - 1),
    (lambda x: np.abs(x - 0.3), 0, 1, 0.29), (lambda x: np.log(x), 0, 1, -1.0),
    (lambda x: np.sqrt(x), 0, 4, 16.0 / 3), (lambda x: x**-0.25, 0, 1, 4.0 / 3),
    (lambda x: np.cosh(x), -1, 1, 2 * math.sinh(1)), (lambda x: x**2 * np.exp(x), 0, 1, math.e - 2),
    (lambda x: 1 / x, 1, math.e, 1.0), (lambda x: np.sin(x) ** 2, 0, 2 * math.pi, math.pi),
    (lambda x: x**4 - 3 * x**2 + 1, -2, 2, 64.0 / 5 - 16 + 4),
    (lambda x: np.exp(-x), 0, 20, 1 - math.exp(-20)),
    (lambda x: 1 / np.sqrt(1 - x * x), -1, 1, math.pi),
    (lambda x: x * np.log(x), 0, 1, -0.25),
]


@pytest.mark.parametrize("g,a,b,truth", CLOSED)
def test_error_estimate_honest(g, a, b, truth):
    r = integrate(g, Interval(a, b))
    if r.converged:
        assert abs(r.value - truth) <= 3 * r.error_estimate + 1e-15 * abs(truth)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=8), st.floats(-2, 0), st.floats(0.1, 3))
def test_polynomials_exact(coefs, a, length):
    b = a + length
    poly = np.polynomial.Polynomial(coefs)
    truth = poly.integ()(b) - poly.integ()(a)
    r = integrate(poly, Interval(a, b), 1e-13, 1e-13)
    scale = float(np.sum(np.abs(coefs))) * max(1.0, abs(a), abs(b)) ** len(coefs) * length
    assert abs(r.value - truth) <= 1e-12 * max(1.0, scale)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95))
def test_additivity(m):
    def g(x):
        return np.exp(np.sin(5 * x)) / np.sqrt(x + 0.01)
    whole = integrate(g, U)
    left, right = integrate(g, Interval(0, m)), integrate(g, Interval(m, 1))
    tol = whole.error_estimate + left.error_estimate + right.error_estimate + 1e-14
    assert abs(left.value + right.value - whole.value) <= tol


@pytest.mark.parametrize("s,limit", [(0.5, 2.0), (0.9, 10.0)])
def test_cutoff_recovers_limit(s, limit):
    rep = cutoff_integral(lambda x: x**-s, 0.0, 1.0, default_schedule())
    assert rep.verdict.kind == "finite_limit"
    assert abs(rep.value - limit) < 1e-6


@pytest.mark.parametrize("s", [1.2, 1.5, 2.0])
def test_cutoff_certifies_divergence(s):
    rep = cutoff_integral(lambda x: x**-s, 0.0, 1.0, default_schedule())
    assert rep.verdict.kind == "divergent"
    assert abs(rep.verdict.rate_exponent - (s - 1)) <= 0.1 * (s - 1)
    assert rep.verdict.fit_quality > 0.99


def test_extrapolate_inconclusive_on_oscillation():
    d = [2.0**-k for k in range(10)]
    v = [1.0 + 0.1 * (-1) ** k for k in range(10)]
    assert extrapolate_cutoff(d, v, [1e-16] * 10).kind == "inconclusive"


def test_excluding_sine_bump_divergent():
    f = build_family("sine_bump")

    def g(x):
        v, d1, _ = f.jet(x)
        with np.errstate(all="ignore"):
            return np.where(v != 0, np.abs(d1) ** 4 / np.abs(v) ** 1.2, 0.0)
    rep = integrate_excluding(g, f, R, "f_nonzero")
    assert rep.verdict.kind == "divergent"
    assert abs(rep.verdict.rate_exponent - 0.2) <= 0.02


def test_excluding_bounded_integrand_finite():
    f = build_family("sine_bump")

    def g(x):
        v, _, d2 = f.jet(x)
        with np.errstate(all="ignore"):
            return np.where(v != 0, np.abs(v * d2) ** 2 / np.abs(v) ** 1.2, 0.0)
    assert integrate_excluding(g, f, R, "f_nonzero").verdict.kind == "finite_limit"


def test_excluding_positive_matches_plain():
    f = build_family("affine_plus_parabola")

    def g(x):
        return f.jet(x)[1] ** 2
    rep = integrate_excluding(g, f, U, "f_positive", deltas=[0.5, 0.25, 0.125, 0.0625])
    plain = integrate(g, U).value
    assert all(abs(v - plain) < 1e-12 for _, v in rep.schedule)


def test_boundary_limit_examples():
    f = build_family("poly_bump", k=2)
    est = boundary_limit(lambda x: np.abs(f.jet(x)[1]) * np.abs(f.value(x)), R, "b")
    assert est.tail_inf == est.tail_sup == 0.0 and est.heuristic
    g = build_family("affine_plus_parabola")
    est = boundary_limit(lambda x: g.jet(x)[1] ** 3 * g.value(x), U, "b")
    assert est.tail_sup < 0
    assert boundary_limit(lambda x: 0.0 * x, U, "a").tail_sup == 0.0
    with pytest.raises(QuadError):
        boundary_limit(lambda x: np.log(x - 1.0), U, "b")
