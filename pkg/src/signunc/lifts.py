"""Dimension shifts: even parts in one variable and radial lifts to R^d.

An even entire G(z) = sum c_k z^(2k) lifts to the radial function
L_d(G)(x) = sum c_k |x|^(2k) on R^d, and for a radial measure built from an
even mu the integral of the lift is lift_factor(d) times the integral of G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .measures import Measure, lift_factor, mu_integral
from .numerics import Decay, DomainError, NumericsError

Evaluator = Callable[[np.ndarray], np.ndarray]

_EPS = np.finfo(float).eps


class TruncationExceeded(NumericsError):
    pass


def even_part(F: Evaluator) -> Evaluator:
    """x -> (F(x) + F(-x))/2."""

    def G(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (F(x) + F(-x))

    return G


@dataclass(frozen=True)
class EvenEntireSeries:
    """Truncated sum c_k z^(2k), trusted on |z| <= radius.

    ``truncation_error_bound`` bounds the omitted tail and the rounding of
    the evaluated sum on that disk.
    """

    c: tuple[float, ...]
    radius: float
    truncation_error_bound: float

    @classmethod
    def from_coefficients(cls, c, tail_bound: float = 0.0, radius: float | None = None, tol: float = 1e-13) -> "EvenEntireSeries":
        c = np.asarray(c, dtype=float)
        r = _rounding_radius(c, tol) if radius is None else min(radius, _rounding_radius(c, tol))
        return cls(tuple(c.tolist()), r, tail_bound + tol)

    @classmethod
    def from_function(
        cls, G: Evaluator, radius: float, n_terms: int = 40, rho: float | None = None, tol: float = 1e-13
    ) -> "EvenEntireSeries":
        """Taylor coefficients of an even entire G from samples on a circle.

        ``G`` must accept complex arrays.  The Cauchy estimate on the circle of
        radius ``rho`` bounds the tail on the disk of radius ``radius``.
        """
        rho = 2.0 * radius if rho is None else rho
        # keep rho modest: coefficient noise grows like eps * max|G| on the circle
        if not rho > radius > 0:
            raise ValueError("need rho > radius > 0")
        m = 8 * n_terms
        theta = 2.0 * math.pi * np.arange(m) / m
        vals = np.asarray(G(rho * np.exp(1j * theta)), dtype=complex)
        coef = np.fft.fft(vals) / m
        k = np.arange(n_terms)
        c = np.real(coef[2 * k]) / rho ** (2 * k)
        q = (radius / rho) ** 2
        peak = float(np.max(np.abs(vals)))
        # Cauchy tail plus aliasing and FFT rounding, both scaled by the peak
        tail = peak * (q**n_terms + 4.0 * _EPS * m) / (1.0 - q)
        return cls.from_coefficients(c, tail, radius, tol)

    def __call__(self, x):
        """G on real or complex scalars/arrays, by Horner in x^2."""
        y = np.asarray(x) ** 2
        out = np.zeros_like(y, dtype=np.result_type(y, float))
        for ck in reversed(self.c):
            out = out * y + ck
        return out


def _rounding_radius(c: np.ndarray, tol: float) -> float:
    """Largest r with eps * sum |c_k| r^(2k) <= tol (cancellation budget)."""
    a = np.abs(c)
    lo, hi = 0.0, 1.0
    f = lambda r: _EPS * float(np.polynomial.polynomial.polyval(r * r, a))
    if f(hi) > tol:
        hi = 1.0
        while hi > 1e-6 and f(hi) > tol:
            hi *= 0.5
        return hi
    while f(hi) <= tol and hi < 1e6:
        lo, hi = hi, 2.0 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) <= tol else (lo, mid)
    return lo


def lift(G: EvenEntireSeries, d: int, fallback: Evaluator | None = None) -> Evaluator:
    """L_d(G) on points of R^d (last axis of length d).

    Inside the trusted disk the series is summed in |x|^2; outside it the
    function G(|x|) is used if ``fallback`` is given, otherwise
    TruncationExceeded is raised.
    """
    d = int(d)
    if d < 1:
        raise ValueError("dimension must be at least 1")

    def LG(x):
        x = np.asarray(x, dtype=float)
        if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        if x.shape[-1] != d:
            raise ValueError(f"points must have last axis of length {d}")
        s = np.sum(x * x, axis=-1)
        inside = s <= G.radius**2
        out = np.zeros(s.shape)
        for ck in reversed(G.c):
            out = out * s + ck
        if not np.all(inside):
            if fallback is None:
                raise TruncationExceeded(f"point beyond the trusted radius {G.radius:g}")
            r = np.sqrt(s[~inside])
            out[~inside] = np.real(fallback(r))
        return out

    return LG


def radial_mu_integral(
    G: Evaluator, mu: Measure, d: int, tol: float = 1e-10, *, f_decay: Decay = Decay.polynomial(2.0)
) -> float:
    """int_{R^d} L_d(G) dmu^d = lift_factor(d) * int G dmu."""
    if d > 1 and mu.atoms:
        raise DomainError("point masses have no radial lift")
    return lift_factor(d) * mu_integral(mu, G, tol, f_decay=f_decay, even=True).value


def monte_carlo_radial(
    LG: Evaluator, mu: Measure, d: int, samples: int = 1_000_000, seed: int = 0, scale: float = 1.0
) -> tuple[float, float]:
    """Direct Monte Carlo of int L_d(G)(x) |x|^(1-d) W(|x|) dx over R^d.

    Points come from the Gaussian N(0, scale^2 I_d); returns
    ``(estimate, standard_error)``.  The variance is finite when the
    integrand is less singular at 0 than |x|^(-d/2).
    """
    if d > 1 and mu.atoms:
        raise DomainError("point masses have no radial lift")
    rng = np.random.default_rng(seed)
    out = []
    chunk = 200_000
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        x = rng.standard_normal((n, d)) * scale
        r = np.sqrt(np.sum(x * x, axis=1))
        logp = -0.5 * (r / scale) ** 2 - d * math.log(scale) - 0.5 * d * math.log(2.0 * math.pi)
        val = LG(x) * r ** (1.0 - d) * mu.W(r) / np.exp(logp)
        out.append(val)
        done += n
    v = np.concatenate(out)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def symmetrize_mc(F: Callable[[np.ndarray], np.ndarray], x: np.ndarray, d: int, rotations: int = 2000, seed: int = 0) -> np.ndarray:
    """Monte Carlo average of F over random rotations of R^d at points x."""
    from scipy.stats import special_ortho_group

    x = np.atleast_2d(np.asarray(x, dtype=float))
    if d == 1:
        return 0.5 * (F(x) + F(-x))
    mats = special_ortho_group.rvs(d, size=rotations, random_state=seed)
    return np.mean([F(x @ m.T) for m in mats], axis=0)
