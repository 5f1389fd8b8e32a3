from __future__ import annotations

import json
import math

import mpmath
import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given
from hypothesis import strategies as st

from signunc.debranges import (
    apply_quadrature,
    flipped_exponential,
    homogeneous,
    kernel,
    kernel_diagonal,
    node_sum,
    paley_wiener,
    phase_derivative,
    quadrature_check,
    quadrature_rule,
    random_kernel_combination,
    t_alpha,
    t_alpha_zeros,
    verify_hb,
    weighted_integral,
)
from signunc.numerics import Interval

PW = paley_wiener(1.0)
E0 = homogeneous(0.0)
E1 = homogeneous(1.0)


def test_t_alpha_definitions():
    assert abs(t_alpha(PW, math.pi / 2, 0.0) - 1.0) < 1e-15
    x = np.linspace(-3, 3, 7)
    assert np.allclose(t_alpha(E0, 0.0, x), -E0.B(x))


def test_t_alpha_quarter_zeros():
    z = t_alpha_zeros(PW, math.pi / 4, Interval(-10, 10))
    k = np.round((z - math.pi / 4) / math.pi)
    assert np.allclose(z, math.pi / 4 + k * math.pi, atol=1e-13)
    assert z.size == 6


def test_cosine_zeros():
    z = t_alpha_zeros(PW, math.pi / 2, Interval(-10, 10))
    expected = np.array([(2 * k + 1) * math.pi / 2 for k in range(-3, 3)])
    assert np.allclose(z, expected, atol=1e-13)


def test_bessel_zeros():
    z = t_alpha_zeros(E0, math.pi / 2, Interval(0, 12))
    # 11.79... also lies in the window
    assert np.allclose(z, sc.jn_zeros(0, 4), atol=1e-12)
    assert abs(z[0] - 2.404825557695773) < 1e-12


@pytest.mark.parametrize("hb", [PW, E0, E1, homogeneous(-0.75), homogeneous(2.5)], ids=lambda h: h.label)
def test_interlacing(hb):
    a = t_alpha_zeros(hb, 0.0, Interval(0.01, 40))
    b = t_alpha_zeros(hb, math.pi / 2, Interval(0.01, 40))
    merged = sorted([(x, 0) for x in a] + [(x, 1) for x in b])
    tags = [t for _, t in merged]
    assert all(t1 != t2 for t1, t2 in zip(tags, tags[1:]))


@pytest.mark.parametrize("delta", [1.0, math.pi, 2 * math.pi])
def test_paley_wiener_rule(delta):
    hb = paley_wiener(delta / 2)
    rule = quadrature_rule(hb, math.pi / 2, Interval(-30, 30))
    k = np.round((rule.nodes * delta / math.pi - 1) / 2)
    assert np.allclose(rule.nodes, (2 * k + 1) * math.pi / delta, atol=1e-12)
    assert np.allclose(rule.weights, 2 * math.pi / delta, rtol=1e-13)


def test_bessel_rule_weights():
    rule = quadrature_rule(E0, math.pi / 2, Interval(0, 30))
    xi = rule.nodes
    expected = math.pi / (-E0.A_prime(xi) * E0.B(xi)).real
    assert np.all(rule.weights > 0)
    assert np.allclose(rule.weights, expected, rtol=1e-10)


def test_empty_rule():
    rule = quadrature_rule(PW, math.pi / 2, Interval(0.1, 0.2))
    assert rule.nodes.size == 0
    assert apply_quadrature(rule, lambda x: x) == 0.0


def test_rule_serializes():
    d = quadrature_rule(PW, 0.0, Interval(-5, 5)).to_dict()
    back = json.loads(json.dumps(d))
    assert set(back) == {"alpha", "nodes", "weights", "window"}
    assert back["window"] == [-5, 5]


def test_extremizer_vanishes_on_nodes():
    F = lambda x: np.cos(x) ** 2 / (x * x - (math.pi / 2) ** 2)
    rule = quadrature_rule(PW, math.pi / 2, Interval(-100, 100))
    interior = rule.nodes[np.abs(np.abs(rule.nodes) - math.pi / 2) > 1e-3]
    assert np.max(np.abs(F(interior))) < 1e-28


def test_fejer_node_sum():
    F = lambda x: np.sinc(np.asarray(x) / math.pi) ** 2 / math.pi**2
    rule = quadrature_rule(PW, 0.0, Interval(-50, 50))
    assert abs(apply_quadrature(rule, F) - 1 / math.pi) < 1e-12
    assert apply_quadrature(rule, lambda x: 0 * x) == 0.0


def test_kernel_closed_form_paley_wiener():
    rng = np.random.default_rng(1)
    w = rng.uniform(-5, 5, 20) + 1j * rng.uniform(-1, 1, 20)
    z = rng.uniform(-5, 5, 20) + 1j * rng.uniform(-1, 1, 20)
    d = z - np.conj(w)
    assert np.allclose(kernel(PW, w, z), np.sin(d) / (math.pi * d), rtol=1e-12)


def _mp_kernel(nu, w, z):
    mpmath.mp.dps = 40
    A = lambda t: mpmath.gamma(nu + 1) * (t / 2) ** (-nu) * mpmath.besselj(nu, t)
    B = lambda t: mpmath.gamma(nu + 1) * (t / 2) ** (-nu) * mpmath.besselj(nu + 1, t)
    u = mpmath.conj(w)
    return complex((B(z) * A(u) - A(z) * B(u)) / (mpmath.pi * (z - u)))


@pytest.mark.parametrize("gap", [1e-3, 1e-5, 1e-8])
def test_confluent_kernel_accuracy(gap):
    w = mpmath.mpf("1.7")
    z = w + mpmath.mpf(gap)
    ref = _mp_kernel(0, w, z)
    got = kernel(E0, float(w), float(z))
    assert abs(got - ref) < 1e-10 * abs(ref)


def test_diagonal_matches_kernel():
    x = np.linspace(-8, 8, 33)
    assert np.allclose(kernel(E1, x, x).real, kernel_diagonal(E1, x), rtol=1e-10)


@given(st.floats(-10, 10), st.floats(-2, 2), st.floats(-10, 10), st.floats(-2, 2))
def test_hermitian_symmetry(a, b, c, d):
    w, z = complex(a, b), complex(c, d)
    for hb in (PW, E0):
        assert kernel(hb, z, w) == np.conj(kernel(hb, w, z))


@given(st.floats(-30, 30))
def test_diagonal_and_phase_positive(x):
    for hb in (PW, E0, E1):
        assert kernel_diagonal(hb, x) > 0
        assert phase_derivative(hb, x) > 0


def test_verify_hb_cases():
    assert verify_hb(PW).passed
    assert verify_hb(E1).passed
    rep = verify_hb(flipped_exponential())
    assert not rep.passed
    assert "HB inequality violated" in rep.reason


@pytest.mark.parametrize("hb", [PW, E0, homogeneous(-0.5)], ids=lambda h: h.label)
def test_reproducing_identity(hb):
    w0, w1 = 0.7, -1.3
    F = lambda x: kernel(hb, w0, x).real * kernel(hb, w1, x).real
    assert abs(weighted_integral(hb, F) - kernel(hb, w0, w1).real) < 1e-6


@pytest.mark.parametrize("hb", [PW, E0, E1], ids=lambda h: h.label)
def test_parseval_and_exactness(hb):
    rng = np.random.default_rng(7)
    U = random_kernel_combination(hb, 4, rng)
    F = U.product()
    val, err = node_sum(hb, math.pi / 2, F)
    assert abs(val - U.norm_squared()) < 1e-6 * U.norm_squared()
    assert abs(val - weighted_integral(hb, F)) < 1e-6 * val
    assert err < 1e-6 * val


def test_quadrature_check_report():
    rep = quadrature_check(PW, trials=2)
    assert rep.passed
    d = rep.to_dict()
    assert d["exactness_max_gap"] < 1e-6
    bad = quadrature_check(flipped_exponential(), trials=1)
    assert not bad.passed


def test_scaled_structure_function():
    s = homogeneous(0.0, 2.0)
    assert s.tau == 2.0
    z = t_alpha_zeros(s, math.pi / 2, Interval(0, 3))
    assert abs(z[0] - 2.404825557695773 / 2) < 1e-12
