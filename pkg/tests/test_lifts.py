from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from signunc.debranges import paley_wiener
from signunc.extremal import extremizer
from signunc.lifts import (
    EvenEntireSeries,
    TruncationExceeded,
    even_part,
    lift,
    monte_carlo_radial,
    radial_mu_integral,
    symmetrize_mc,
)
from signunc.measures import katz_sarnak, lebesgue, mu_integral, power_weight
from signunc.numerics import Decay, DomainError

GAUSS_SERIES = EvenEntireSeries.from_coefficients([(-1) ** k / math.factorial(k) for k in range(60)])
gauss = lambda x: np.exp(-np.asarray(x) ** 2)


def test_even_part_example():
    G = even_part(lambda x: x + x**2)
    x = np.linspace(-3, 3, 13)
    assert np.array_equal(G(x), 0.5 * ((x + x**2) + (-x + x**2)))
    assert np.allclose(G(x), x**2, atol=1e-15)


@given(st.floats(-50, 50), st.integers(0, 5))
def test_even_part_idempotent(x, k):
    F = lambda t: np.sin(t + k) * np.exp(0.1 * t)
    once = even_part(F)
    assert once(x) == even_part(once)(x)


def test_even_part_fixes_extremizer():
    F = extremizer(paley_wiener(1.0))
    x = np.linspace(-9, 9, 37)
    assert np.array_equal(even_part(F)(x), F(x))


def test_lift_polynomial_example():
    G = EvenEntireSeries.from_coefficients([1.0, -1.0])
    assert lift(G, 3)(np.array([1.0, 0.0, 0.0])) == 0.0
    assert lift(G, 2)(np.array([0.6, 0.8])) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_lift_along_axis(d):
    x = np.random.default_rng(d).uniform(-GAUSS_SERIES.radius, GAUSS_SERIES.radius, 200)
    pts = np.zeros((x.size, d))
    pts[:, 0] = x
    assert np.max(np.abs(lift(GAUSS_SERIES, d)(pts) - gauss(x))) < 1e-12


@given(st.lists(st.floats(-1.4, 1.4), min_size=3, max_size=3))
def test_lift_is_radial(v):
    x = np.array(v)
    if np.linalg.norm(x) > GAUSS_SERIES.radius:
        return
    L = lift(GAUSS_SERIES, 3)
    assert abs(L(x) - gauss(np.linalg.norm(x))) < 1e-12


def test_lift_d1_is_identity():
    x = np.linspace(-2, 2, 9)
    assert np.allclose(lift(GAUSS_SERIES, 1)(x), GAUSS_SERIES(x), atol=0, rtol=1e-15)


def test_truncation_guard():
    L = lift(GAUSS_SERIES, 2)
    far = np.array([[GAUSS_SERIES.radius + 1.0, 0.0]])
    with pytest.raises(TruncationExceeded):
        L(far)
    assert lift(GAUSS_SERIES, 2, fallback=gauss)(far)[0] == gauss(GAUSS_SERIES.radius + 1.0)


def test_coefficients_from_samples():
    S = EvenEntireSeries.from_function(gauss, 1.0, 30, rho=2.5)
    exact = np.array([(-1) ** k / math.factorial(k) for k in range(30)])
    assert np.max(np.abs(np.array(S.c) - exact)) < 1e-12
    x = np.linspace(-1, 1, 41)
    assert np.max(np.abs(S(x) - gauss(x))) <= S.truncation_error_bound


def test_radial_integral_conventions():
    one_d = mu_integral(lebesgue(), gauss, 1e-12, f_decay=Decay.exponential(1.0)).value
    assert radial_mu_integral(gauss, lebesgue(), 1, f_decay=Decay.exponential(1.0)) == pytest.approx(one_d, rel=1e-14)
    assert radial_mu_integral(gauss, lebesgue(), 2, f_decay=Decay.exponential(1.0)) == pytest.approx(math.pi * one_d, rel=1e-14)


def test_radial_integral_rejects_atoms():
    with pytest.raises(DomainError):
        radial_mu_integral(gauss, katz_sarnak("O"), 2)


def test_lifted_extremizer_integral_vanishes():
    F = extremizer(paley_wiener(1.0))
    assert abs(radial_mu_integral(F, lebesgue(), 3, 1e-10, f_decay=F.decay)) < 1e-8


@pytest.mark.parametrize("d", [2, 3])
def test_sign_structure_is_preserved(d):
    # r(L_d G) = r(G) along random directions and the integral sign agrees
    F = extremizer(paley_wiener(1.0))
    rng = np.random.default_rng(d)
    u = rng.standard_normal((50, d))
    u /= np.linalg.norm(u, axis=1)[:, None]
    r = np.linspace(0.01, 10, 400)
    LG = lambda pts: F(np.linalg.norm(pts, axis=-1))
    vals = LG(r[None, :, None] * u[:, None, :])
    last = r[np.nonzero(vals < 0)[1].max()]
    assert abs(last - F.xi1) < r[1] - r[0]
    G = lambda x: (np.asarray(x) ** 2 - 1.0) * np.exp(-np.asarray(x) ** 2)
    one = mu_integral(power_weight(0.5), G, 1e-11, f_decay=Decay.exponential(1.0)).value
    lifted = radial_mu_integral(G, power_weight(0.5), d, f_decay=Decay.exponential(1.0))
    assert np.sign(one) == np.sign(lifted)


@pytest.mark.parametrize("nu", [0.0, 0.5])
@pytest.mark.parametrize("d", [2, 3])
def test_monte_carlo_matches(nu, d):
    mu = power_weight(nu)
    ref = radial_mu_integral(gauss, mu, d, f_decay=Decay.exponential(1.0))
    est, se = monte_carlo_radial(lift(GAUSS_SERIES, d, fallback=gauss), mu, d, 200_000, seed=3, scale=0.8)
    assert abs(est - ref) < 0.01 * ref
    assert se < 0.01 * ref


def test_monte_carlo_is_reproducible():
    L = lift(GAUSS_SERIES, 2, fallback=gauss)
    a = monte_carlo_radial(L, power_weight(0.0), 2, 10_000, seed=5)
    b = monte_carlo_radial(L, power_weight(0.0), 2, 10_000, seed=5)
    assert a == b


def test_rotation_average():
    x = np.array([[1.0, 2.0, 2.0]])
    avg = symmetrize_mc(lambda p: p[..., 0] ** 2, x, 3, rotations=4000, seed=1)
    assert abs(avg[0] - 9.0 / 3) < 0.15
    assert symmetrize_mc(lambda p: p[..., 0], np.array([[2.0]]), 1)[0] == 0.0
