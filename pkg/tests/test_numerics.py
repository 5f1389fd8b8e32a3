from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from signunc.numerics import (
    Decay,
    DomainError,
    Interval,
    InvalidBracket,
    NonConvergence,
    RealPolynomial,
    find_root,
    find_roots_bracketed,
    integrate_weighted,
    poly_add,
    poly_mul,
)


def test_interval_rejects_empty():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    assert Interval(-1.0, 2.0).width == 3.0


@pytest.mark.parametrize(
    "a, b, expected",
    [
        (Decay.compact(2.0), Decay.polynomial(-3.0), Decay.compact(2.0)),
        (Decay.exponential(1.0), Decay.polynomial(2.0), Decay.exponential(1.0)),
        (Decay.exponential(1.0), Decay.polynomial(-2.0), Decay.exponential(0.5)),
        (Decay.polynomial(2.0), Decay.polynomial(-1.0), Decay.polynomial(1.0)),
    ],
)
def test_decay_product(a, b, expected):
    assert a.times(b) == expected
    assert b.times(a) == expected


def test_decay_rejects_bad_rate():
    with pytest.raises(ValueError):
        Decay.exponential(0.0)
    with pytest.raises(ValueError):
        Decay("gaussian", 1.0)


def test_gaussian_integral():
    res = integrate_weighted(lambda x: np.exp(-x * x), None, Decay.exponential(1.0), 1e-12)
    assert abs(res.value - math.sqrt(math.pi)) < 1e-11
    assert res.evaluations > 0


def test_fejer_kernel_algebraic_tail():
    # int sin^2 x / x^2 dx = pi, tail ~ x^-2 with period pi
    f = lambda x: np.sinc(np.asarray(x) / math.pi) ** 2
    res = integrate_weighted(f, None, Decay.polynomial(2.0, period=math.pi), 1e-10)
    assert abs(res.value - math.pi) < 1e-9


@pytest.mark.parametrize("s", [-0.5, 0.0, 1.0, 3.0])
def test_origin_power_weight(s):
    # int |x|^s exp(-x^2) dx = Gamma((s+1)/2)
    res = integrate_weighted(
        lambda x: np.exp(-np.asarray(x) ** 2),
        lambda x: np.abs(x) ** s,
        Decay.exponential(1.0),
        1e-11,
        origin_power=s,
        even=True,
    )
    assert abs(res.value - math.gamma(0.5 * (s + 1.0))) < 1e-9


def test_compact_support_exact():
    res = integrate_weighted(lambda x: np.ones_like(x), None, Decay.compact(1.0), 1e-12)
    assert abs(res.value - 2.0) < 1e-13


def test_growing_exponential_tail_raises():
    with pytest.raises((DomainError, NonConvergence)):
        integrate_weighted(lambda x: np.exp(0.1 * np.abs(x)), None, Decay.exponential(1.0), 1e-10)


def test_non_integrable_polynomial_tail_raises():
    with pytest.raises((DomainError, ValueError, NonConvergence)):
        integrate_weighted(lambda x: 1.0 / (1.0 + np.abs(x)), None, Decay.polynomial(1.0), 1e-10)


def test_find_root_quarter_shift():
    # zeros of sin(x - pi/4)
    r = find_root(lambda x: math.sin(x - math.pi / 4), (0.0, 2.0))
    assert abs(r - math.pi / 4) < 1e-14


def test_find_root_invalid_bracket():
    with pytest.raises(InvalidBracket):
        find_root(lambda x: x * x + 1.0, Interval(-1.0, 1.0))


@given(st.lists(st.floats(0.1, 30.0), min_size=1, max_size=20))
def test_vectorized_roots_match_scalar(centres):
    c = np.array(centres)
    roots = find_roots_bracketed(lambda x: np.tanh(x - c), lambda x: 1 / np.cosh(x - c) ** 2, c - 0.7, c + 0.3)
    assert np.allclose(roots, c, atol=1e-12)


@given(
    st.lists(st.floats(-5, 5), min_size=1, max_size=6),
    st.lists(st.floats(-5, 5), min_size=1, max_size=6),
    st.floats(-2, 2),
)
def test_polynomial_ring_operations(p, q, x):
    P, Q = RealPolynomial(p), RealPolynomial(q)
    assert math.isclose((P * Q)(x), P(x) * Q(x), rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose((P + Q)(x), P(x) + Q(x), rel_tol=1e-9, abs_tol=1e-9)
    assert np.allclose(poly_mul(P, Q).coeffs, poly_mul(Q, P).coeffs, rtol=1e-12, atol=1e-12)
    assert poly_add(P, Q) == poly_add(Q, P)


def test_polynomial_from_roots_squared():
    P = RealPolynomial.from_roots_squared([1.0, 2.0])
    assert P.to_list() == [4.0, 0.0, -5.0, 0.0, 1.0]
    assert P.degree() == 4
    assert RealPolynomial([0.0, 0.0]).is_zero()
