from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from signunc.debranges import kernel, verify_hb
from signunc.extremal import sharp_constant
from signunc.kernelbuild import (
    WeightedPWSpace,
    build_gram,
    built_kernel_eval,
    reproducing_residual,
    structure_function,
    validate_c4,
)
from signunc.measures import exp_decay, katz_sarnak, lebesgue, sinc2pi
from signunc.numerics import DomainError


@pytest.fixture(scope="module")
def leb():
    return build_gram(WeightedPWSpace(math.pi, lebesgue(), 10))


@pytest.fixture(scope="module")
def sp_kernel():
    bk = build_gram(WeightedPWSpace(math.pi, katz_sarnak("Sp"), 20))
    return bk, structure_function(bk)


@pytest.mark.parametrize("tau", [1.0, math.pi])
def test_lebesgue_gram_is_scaled_identity(tau):
    bk = build_gram(WeightedPWSpace(tau, lebesgue(), 3))
    assert bk.gram.shape == (7, 7)
    assert np.allclose(bk.gram, math.pi / tau * np.eye(7), atol=1e-13)
    assert abs(bk.diagnostics["condition_number"] - 1.0) < 1e-12


def test_orthogonal_gram_rank_one_atom():
    sp = WeightedPWSpace(math.pi, katz_sarnak("O"), 6)
    G = build_gram(sp).gram
    s0 = np.real(sp.basis(np.array(0.0)))
    assert np.allclose(G, np.eye(13) + 0.5 * np.outer(s0, s0), atol=1e-12)


def test_symplectic_gram_against_direct_quadrature():
    # entries int s_m s_n (1 - sinc) dx computed independently with scipy.quad
    from scipy.integrate import quad

    sp = WeightedPWSpace(math.pi, katz_sarnak("Sp"), 4)
    G = build_gram(sp).gram
    idx = sp.indices
    for m, n in [(0, 0), (0, 1), (1, -2), (3, 3)]:
        f = lambda x: float(np.real(sp.basis(np.array(x)))[m + 4] * np.real(sp.basis(np.array(x)))[n + 4] * sinc2pi(x))
        pert = sum(quad(f, a, a + 1, limit=200)[0] for a in range(-300, 300))
        ref = (1.0 if m == n else 0.0) - pert
        assert abs(G[m + 4, n + 4] - ref) < 1e-6, (idx[m + 4], idx[n + 4])


def test_kernel_matches_paley_wiener(leb):
    rng = np.random.default_rng(3)
    w = rng.uniform(-4, 4, 10) + 1j * rng.uniform(-1, 1, 10)
    z = rng.uniform(-4, 4, 10) + 1j * rng.uniform(-1, 1, 10)
    d = z - np.conj(w)
    assert np.allclose(built_kernel_eval(leb, w, z), np.sin(math.pi * d) / (math.pi * d), rtol=1e-10, atol=1e-14)


@given(st.floats(-6, 6), st.floats(-6, 6))
def test_kernel_even_symmetry_and_diagonal(w, z):
    bk = _sp_cached()
    assert abs(built_kernel_eval(bk, -w, -z) - built_kernel_eval(bk, w, z)) < 1e-12
    k = built_kernel_eval(bk, w, w)
    assert abs(k.imag) < 1e-14 and k.real > 0


_CACHE = {}


def _sp_cached():
    if "sp" not in _CACHE:
        _CACHE["sp"] = build_gram(WeightedPWSpace(math.pi, katz_sarnak("Sp"), 12))
    return _CACHE["sp"]


def test_reproducing_residual(sp_kernel):
    bk, _ = sp_kernel
    assert reproducing_residual(bk) < 1e-8
    assert bk.diagnostics["reproducing_residual"] < 1e-8


def test_structure_function_lebesgue(leb):
    hb = structure_function(leb)
    assert abs(sharp_constant(hb) - 0.5) < 1e-6
    # the derived E generates the built kernel (it need not be exp(-i pi z)
    # itself: E is fixed only up to the non-uniqueness of the normalization)
    rng = np.random.default_rng(5)
    w = rng.uniform(-3, 3, 8) + 1j * rng.uniform(-1, 1, 8)
    z = rng.uniform(-3, 3, 8) + 1j * rng.uniform(-1, 1, 8)
    assert np.allclose(kernel(hb, w, z), built_kernel_eval(leb, w, z), rtol=1e-9, atol=1e-13)


def test_structure_function_passes_hb(sp_kernel):
    _, hb = sp_kernel
    assert verify_hb(hb).passed
    assert hb.tau == math.pi


def test_so_even_constant_below_half():
    bk = build_gram(WeightedPWSpace(math.pi, katz_sarnak("SOeven"), 20))
    assert sharp_constant(structure_function(bk)) < 0.5


def test_c4_lebesgue(leb):
    rep = validate_c4(leb, structure_function(leb), trials=2)
    assert rep.passed and rep.max_gap < 1e-8


def test_c4_orthogonal_atom():
    bk = build_gram(WeightedPWSpace(math.pi, katz_sarnak("O"), 20))
    rep = validate_c4(bk, structure_function(bk), trials=2)
    assert rep.passed
    assert json.loads(json.dumps(rep.to_dict()))["passed"] is True


def test_needs_level():
    with pytest.raises(DomainError):
        build_gram(WeightedPWSpace(1.0, exp_decay(1.0), 5))


def test_space_validation():
    with pytest.raises(ValueError):
        WeightedPWSpace(math.pi, lebesgue(), 2)
    with pytest.raises(ValueError):
        WeightedPWSpace(-1.0, lebesgue(), 5)


def test_diagnostics_serialize(sp_kernel):
    bk, _ = sp_kernel
    d = json.loads(json.dumps(bk.to_dict()))
    assert d["N"] == 20
    assert {"condition_number", "reproducing_residual"} <= set(d)
