"""Normalized Bessel functions of the homogeneous de Branges spaces.

    A_nu(z) = Gamma(nu+1) (z/2)^-nu J_nu(z)
    B_nu(z) = Gamma(nu+1) (z/2)^-nu J_{nu+1}(z)

A_nu is even, B_nu is odd, both are real entire of exponential type 1 and
E_nu = A_nu - i B_nu is Hermite-Biehler for nu > -1.  Small arguments use
the power series; large arguments use the Hankel expansion of J.
"""

from __future__ import annotations

import math

import numpy as np

from .numerics import DomainError, NonConvergence, find_root

_MAX_TERMS = 200
_REL_STOP = 1e-17


def _check_order(nu: float) -> float:
    nu = float(nu)
    if not nu > -1.0:
        raise DomainError(f"Bessel order must exceed -1, got {nu}")
    return nu


def switch_radius(nu: float) -> float:
    """|z| above which the asymptotic form replaces the series.

    The series loses about exp(|z|) ulps to cancellation on the real axis,
    the Hankel expansion is limited by its smallest term, roughly
    exp(-2|z|) for modest orders.  The crossover is tuned against an
    independent evaluator in the tests.
    """
    return max(13.0, 12.0 + 0.4 * nu)


def _series(nu: float, z: np.ndarray, shift: int, deriv: bool = False) -> np.ndarray:
    """Power series of A_nu (shift 0), B_nu (shift 1) or B_nu' (deriv)."""
    h = -0.25 * z * z
    c = np.full_like(z, 1.0 / (nu + 1.0) if shift else 1.0)
    total = 0.5 * c if deriv else c.copy()
    for n in range(1, _MAX_TERMS):
        # c_n = (-1)^n (z/2)^(2n) / (n! (nu+1)_(n+shift))
        c = c * h / (n * (nu + n + shift))
        t = (n + 0.5) * c if deriv else c
        total = total + t
        if np.all(np.abs(t) <= _REL_STOP * np.maximum(np.abs(total), 1e-300)):
            break
    if shift and not deriv:
        total = 0.5 * z * total
    return total


def _hankel_j(mu: float, z: np.ndarray) -> np.ndarray:
    """J_mu(z) for Re z >= 0 and large |z| via the Hankel expansion."""
    four_mu2 = 4.0 * mu * mu
    inv8z = 1.0 / (8.0 * z)
    p = np.ones_like(z)
    q = np.zeros_like(z)
    term = np.ones_like(z)
    last = np.full(z.shape, np.inf)
    live = np.ones(z.shape, dtype=bool)
    for k in range(1, 80):
        term = term * (four_mu2 - (2 * k - 1) ** 2) * inv8z / k
        mag = np.abs(term)
        # asymptotic series: stop at the smallest term
        if (2 * k - 1) ** 2 > four_mu2:
            live &= mag < last
        if not live.any():
            break
        upd = np.where(live, term, 0.0)
        if k % 2:
            q = q + (1 if (k // 2) % 2 == 0 else -1) * upd
        else:
            p = p + (1 if (k // 2) % 2 == 0 else -1) * upd
        live &= mag > 1e-17
        last = mag
    omega = z - (0.5 * mu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * z)) * (p * np.cos(omega) - q * np.sin(omega))


def _evaluate(nu: float, z, which: str):
    nu = _check_order(nu)
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    zz = np.atleast_1d(arr)
    out = np.empty_like(zz)
    big = np.abs(zz) > switch_radius(nu)
    small = ~big
    if small.any():
        zs = zz[small]
        if which == "A":
            out[small] = _series(nu, zs, 0)
        elif which == "B":
            out[small] = _series(nu, zs, 1)
        else:  # B'
            out[small] = _series(nu, zs, 1, deriv=True)
    if big.any():
        zb = zz[big]
        flip = zb.real < 0
        w = np.where(flip, -zb, zb)
        g = math.gamma(nu + 1.0)
        scale = g * (0.5 * w) ** (-nu)
        if which == "A":
            out[big] = scale * _hankel_j(nu, w)
        else:
            bval = scale * _hankel_j(nu + 1.0, w)
            bval = np.where(flip, -bval, bval)
            if which == "B":
                out[big] = bval
            else:
                out[big] = scale * _hankel_j(nu, w) - (2.0 * nu + 1.0) * bval / zb
    return out[0] if scalar else out.reshape(arr.shape)


def A_nu(nu: float, z):
    """Even companion function A_nu; A_nu(0) = 1."""
    return _evaluate(nu, z, "A")


def B_nu(nu: float, z):
    """Odd companion function B_nu; B_nu(0) = 0."""
    return _evaluate(nu, z, "B")


def A_nu_prime(nu: float, z):
    # exact identity A_nu' = -B_nu
    return -B_nu(nu, z)


def B_nu_prime(nu: float, z):
    """B_nu' = A_nu - (2 nu + 1) B_nu / z, from the differentiated series near 0."""
    return _evaluate(nu, z, "Bp")


def E_nu(nu: float, z):
    return A_nu(nu, z) - 1j * B_nu(nu, z)


def norm_constant(nu: float) -> float:
    """c_nu with ||F||^2_{E_nu} = c_nu * int |F(x)|^2 |x|^(2nu+1) dx."""
    nu = _check_order(nu)
    return math.pi * 2.0 ** (-2.0 * nu - 1.0) / math.gamma(nu + 1.0) ** 2


def first_bessel_zero(nu: float) -> float:
    """First positive zero j_{nu,1} of J_nu (equivalently of A_nu)."""
    nu = _check_order(nu)
    f = lambda x: float(np.real(A_nu(nu, x)))
    # j_{nu,1}^2 > 4(nu+1) for every nu > -1 and j grows like nu, so scan
    # upward from just below that bound
    x = 1.9 * math.sqrt(nu + 1.0)
    step = 0.05 * max(1.0, x)
    fx = f(x)
    if fx <= 0:
        raise NonConvergence(f"A_nu already non-positive at the lower bound {x}")
    horizon = 4.0 * (nu + 5.0)
    while x < horizon:
        y = x + step
        fy = f(y)
        if fy <= 0:
            return find_root(f, (x, y), 1e-15)
        x, fx = y, fy
    raise NonConvergence(f"no sign change of A_nu below {horizon}")
