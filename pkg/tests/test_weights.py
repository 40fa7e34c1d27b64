import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gnverify.funcspace import Interval
from gnverify.weights import (WeightError, classify_weight, make_primitive, parse_weight_spec,
                              registry, shift_primitive, tabulated_weight, transform_value)

CLOSED = [
    ("unit", {}), ("power", {"theta": 0.5, "p": 4}), ("power", {"theta": -1.0, "p": 4}),
    ("power", {"theta": 0.1, "p": 2}), ("log_reciprocal", {}),
    ("exponential", {"alpha": 1.0, "beta": 1.0}), ("exponential", {"alpha": -0.5, "beta": 1.0}),
    ("exponential", {"alpha": 1.0, "beta": 2.0}),
    ("exponential", {"alpha": 2.0, "beta": 1.5, "shifted": True}),
]


def _grid(w):
    if w.domain.finite_a and w.domain.a == 0.0:
        return np.geomspace(1e-3, 5.0, 101)
    return np.linspace(-3.0, 3.0, 101)


def _fd_rel(H, h, lam):
    step = 1e-5 * np.maximum(np.abs(lam), 1e-2)
    d = (np.asarray(H(lam + step)) - np.asarray(H(lam - step))) / (2 * step)
    ref = np.asarray(h(lam))
    return np.max(np.abs(d - ref) / np.maximum(np.abs(ref), 1e-300))


@pytest.mark.parametrize("name,params", CLOSED)
def test_closed_form_identity_and_fd(name, params):
    w = registry(name, **params)
    tw = make_primitive(w)
    lam = _grid(w)
    Hv, hv = tw.Hv(lam), tw.h(lam)
    nz = Hv != 0
    rel = np.abs(tw.T(lam) * hv - Hv)[nz] / np.abs(Hv[nz])
    assert np.max(rel) < 1e-12
    assert _fd_rel(tw.Hv, tw.h, lam) < 1e-6


@pytest.mark.parametrize("name,params", [("power", {"theta": 0.1, "p": 4}), ("unit", {}),
                                         ("exponential", {"alpha": 1.0, "beta": 2.0})])
def test_zero_anchored_numeric_matches_closed(name, params):
    w = registry(name, **params)
    closed = make_primitive(w, "zero_anchored")
    bare = registry("custom", h=w.h, domain=w.domain)
    num = make_primitive(bare, "zero_anchored")
    assert num.numeric
    lam = np.geomspace(1e-3, 5.0, 41)
    assert np.max(np.abs(num.Hv(lam) - closed.Hv(lam)) / np.abs(closed.Hv(lam))) < 1e-8
    rel = np.abs(num.T(lam) * num.h(lam) - num.Hv(lam)) / np.abs(num.Hv(lam))
    assert np.max(rel) < 1e-8


def test_point_anchor_matches_log():
    w = registry("custom", h=lambda x: 1.0 / np.asarray(x, dtype=float))
    tw = make_primitive(w, ("point_anchored", 1.0, 0.0))
    lam = np.geomspace(1e-2, 1e2, 31)
    assert np.max(np.abs(tw.Hv(lam) - np.log(lam))) < 1e-8


def test_unit_transform_is_identity():
    tw = make_primitive(registry("unit"))
    lam = np.linspace(-5, 5, 11)
    assert np.array_equal(tw.T(lam), lam)


def test_power_transform_half_p4():
    tw = make_primitive(registry("power", theta=0.5, p=4))
    lam = np.geomspace(0.01, 100, 9)
    assert np.allclose(tw.T(lam), -lam, rtol=1e-14)


@given(theta=st.floats(-2.0, 2.0), p=st.floats(2.0, 8.0), lam=st.floats(1e-3, 1e3))
@settings(max_examples=60, deadline=None)
def test_power_transform_linear(theta, p, lam):
    if abs(1 - theta * p) < 1e-3:
        return
    tw = make_primitive(registry("power", theta=theta, p=p))
    assert transform_value(tw, lam) == pytest.approx(lam / (1 - theta * p), rel=1e-12)


@given(c=st.floats(-5.0, 5.0), lam=st.floats(0.1, 10.0))
@settings(max_examples=40, deadline=None)
def test_anchor_shift_adds_c_over_h(c, lam):
    tw = make_primitive(registry("log_reciprocal"))
    sh = shift_primitive(tw, c)
    assert transform_value(sh, lam) - transform_value(tw, lam) == pytest.approx(c * lam,
                                                                                  abs=1e-9)


def test_G_power():
    # G_h = |1 - theta p|^{-p/2} lambda^{-theta p}
    tw = make_primitive(registry("power", theta=0.5, p=4), p=4.0)
    lam = np.array([0.5, 1.0, 2.0])
    assert np.allclose(tw.G(lam), lam**-2.0, rtol=1e-13)
    with pytest.raises(WeightError):
        make_primitive(registry("unit")).G(lam)


def test_classification():
    c = classify_weight(make_primitive(registry("unit")), 2.0)
    assert c.bounded_near_zero and c.integrable_near_zero
    c = classify_weight(make_primitive(registry("log_reciprocal")), 2.0)
    assert not c.bounded_near_zero and c.nonincreasing_near_zero and not c.integrable_near_zero
    c = classify_weight(make_primitive(registry("power", theta=0.1, p=4), "zero_anchored"), 4.0)
    assert c.integrable_near_zero and c.h_ok and c.T_ok
    c = classify_weight(make_primitive(registry("power", theta=-1.0, p=4)), 4.0)
    assert c.bounded_near_zero and not c.nonincreasing_near_zero


@pytest.mark.parametrize("spec,code", [
    ("nosuch", "UNKNOWN_WEIGHT"), ("power:theta=0.5,p=2", "SINGULAR_PARAMS"),
    ("exponential:alpha=0", "SINGULAR_PARAMS"), ("exponential:alpha=1,beta=0.5",
                                                 "SINGULAR_PARAMS"),
    ("power:theta", "BAD_SPEC"),
])
def test_spec_errors(spec, code):
    with pytest.raises(WeightError) as e:
        parse_weight_spec(spec)
    assert e.value.code == code


def test_anchor_errors():
    with pytest.raises(WeightError) as e:
        make_primitive(registry("log_reciprocal"), "zero_anchored")
    assert e.value.code == "NOT_INTEGRABLE_AT_ZERO"
    with pytest.raises(WeightError) as e:
        make_primitive(registry("custom", h=np.exp))
    assert e.value.code == "NO_CLOSED_FORM"
    with pytest.raises(WeightError) as e:
        make_primitive(registry("unit"), ("point_anchored", -math.inf, 0.0))
    assert e.value.code == "BAD_ANCHOR"


def test_tabulated_weight(tmp_path):
    lam = np.linspace(0.0, 4.0, 41)
    w = tabulated_weight(lam, 1.0 + lam)
    tw = make_primitive(w)
    assert float(tw.Hv(2.0)) == pytest.approx(4.0, rel=1e-12)
    path = tmp_path / "w.txt"
    np.savetxt(path, np.column_stack([lam, 1.0 + lam]))
    w2 = parse_weight_spec(f"custom:table={path}")
    assert float(make_primitive(w2).Hv(3.0)) == pytest.approx(7.5, rel=1e-12)
    with pytest.raises(WeightError):
        tabulated_weight([0.0, 1.0], [1.0, -1.0])
    assert w.domain == Interval(0.0, 4.0)
