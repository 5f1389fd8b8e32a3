"""Foundation numerics: weighted integration over the real line, bracketed
root finding and a small dense real polynomial type.

Evaluators passed to :func:`integrate_weighted` must be numpy-vectorized:
they receive a 1-d float array and return an array of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import optimize
from scipy.special import roots_jacobi

Evaluator = Callable[[np.ndarray], np.ndarray]


class NumericsError(Exception):
    """Base class for numerical failures raised by this package."""


class NonConvergence(NumericsError):
    pass


class DomainError(NumericsError, ValueError):
    pass


class InvalidBracket(NumericsError, ValueError):
    pass


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_list(self) -> list[float]:
        return [self.lo, self.hi]


@dataclass(frozen=True)
class Decay:
    """Tail class of an integrand (or of a measure density).

    ``polynomial(p)``: |g(x)| = O(|x|^-p); negative ``p`` describes growth.
    ``exponential(eps)``: |g(x)| = O(exp(-eps |x|)).
    ``compact(R)``: g vanishes for |x| > R.

    ``period`` is an optional oscillation period of the tail; when given,
    truncation radii are aligned to multiples of it so that tail
    extrapolation sees a pure power series.
    """

    kind: str
    rate: float
    period: float | None = None

    def __post_init__(self):
        if self.kind not in ("polynomial", "exponential", "compact"):
            raise ValueError(f"unknown decay kind {self.kind!r}")
        if self.kind != "polynomial" and not self.rate > 0:
            raise ValueError(f"{self.kind} decay needs a positive rate")

    @classmethod
    def polynomial(cls, p: float, period: float | None = None) -> "Decay":
        return cls("polynomial", float(p), period)

    @classmethod
    def exponential(cls, eps: float) -> "Decay":
        return cls("exponential", float(eps))

    @classmethod
    def compact(cls, radius: float) -> "Decay":
        return cls("compact", float(radius))

    def times(self, other: "Decay") -> "Decay":
        """Decay class of a product of two functions with these tails."""
        for a, b in ((self, other), (other, self)):
            if a.kind == "compact":
                return a
        for a, b in ((self, other), (other, self)):
            if a.kind == "exponential":
                # polynomial growth of the other factor eats an arbitrarily
                # small part of the exponential rate
                return a if b.kind == "polynomial" and b.rate >= 0 else Decay.exponential(a.rate / 2)
        return Decay.polynomial(self.rate + other.rate, self.period or other.period)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "rate": self.rate}
        if self.period is not None:
            out["period"] = self.period
        return out

    def __str__(self) -> str:
        return f"{self.kind}({self.rate:g})"


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error estimate must be non-negative")


# --------------------------------------------------------------------------
# integration


@lru_cache(maxsize=None)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=None)
def _gauss_jacobi(n: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    return roots_jacobi(n, 0.0, beta)


class _Counter:
    def __init__(self, g: Evaluator):
        self.g = g
        self.n = 0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        self.n += x.size
        y = np.asarray(self.g(x))
        if np.iscomplexobj(y):
            y = y.real
        y = np.broadcast_to(y, x.shape).astype(float)
        if not np.all(np.isfinite(y)):
            raise DomainError("integrand produced non-finite values")
        return y


def _panels(g: _Counter, a: np.ndarray, b: np.ndarray, batch: int = 20000) -> tuple[np.ndarray, np.ndarray]:
    """20-point Gauss-Legendre value per panel, error from the 10-point rule."""
    if a.size > batch:
        parts = [_panels(g, a[i : i + batch], b[i : i + batch], batch) for i in range(0, a.size, batch)]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
    t20, w20 = _gauss_legendre(20)
    t10, w10 = _gauss_legendre(10)
    mid = 0.5 * (a + b)[:, None]
    half = 0.5 * (b - a)[:, None]
    t = np.concatenate([t20, t10])
    y = g((mid + half * t).ravel()).reshape(a.size, t.size)
    hv = half[:, 0]
    v20 = hv * (y[:, :20] @ w20)
    v10 = hv * (y[:, 20:] @ w10)
    return v20, np.abs(v20 - v10)


def _adaptive(g: _Counter, edges: np.ndarray, tol: float, max_evals: int) -> tuple[float, float]:
    a, b = edges[:-1].astype(float), edges[1:].astype(float)
    val, err = _panels(g, a, b)
    length = float(edges[-1] - edges[0])
    while err.sum() > tol:
        if g.n > max_evals:
            raise NonConvergence(
                f"adaptive integration stalled at error {err.sum():.3g} > {tol:.3g}"
            )
        local = tol * (b - a) / length
        split = err > local
        if not split.any():
            split = err >= err.max()
        m = 0.5 * (a[split] + b[split])
        na = np.concatenate([a[split], m])
        nb = np.concatenate([m, b[split]])
        nv, ne = _panels(g, na, nb)
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
    return float(val.sum()), float(err.sum())


def _grid(lo: float, hi: float, width: float, extra: Sequence[float] = ()) -> np.ndarray:
    n = max(1, int(math.ceil((hi - lo) / width)))
    pts = np.linspace(lo, hi, n + 1)
    inner = [p for p in extra if lo < p < hi]
    if inner:
        pts = np.unique(np.concatenate([pts, inner]))
    return pts


def _origin_panel(g: _Counter, h: float, power: float, n: int = 40) -> tuple[float, float]:
    """Integral of g over [0, h] where g(x) = x^power * smooth(x)."""
    vals = []
    for m in (n, n // 2 + 5):
        t, w = _gauss_jacobi(m, power)
        x = 0.5 * h * (1.0 + t)
        smooth = g(x) / x**power
        vals.append((0.5 * h) ** (power + 1.0) * float(w @ smooth))
    return vals[0], abs(vals[0] - vals[1])


def integrate_weighted(
    f: Evaluator,
    weight: Evaluator | None,
    decay: Decay,
    tol: float = 1e-10,
    *,
    span: float | None = None,
    even: bool = False,
    origin_power: float | None = None,
    breakpoints: Sequence[float] = (),
    max_evals: int = 20_000_000,
) -> IntegralResult:
    """Integrate ``f * weight`` over the real line.

    The line is split into a core ``[-span, span]`` handled by adaptive
    Gauss-Legendre panels and tails handled per ``decay``: compact support
    is cut exactly, exponential tails are covered by doubling panels until
    they stop contributing, and algebraic tails are Richardson-extrapolated
    over doubling truncation radii.

    ``origin_power = s`` declares ``f * weight = |x|^s * smooth`` near the
    origin; the panel touching 0 then uses Gauss-Jacobi nodes.  ``even``
    integrates over the half line and doubles.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if weight is None:
        g = _Counter(f)
    else:
        g = _Counter(lambda x: np.asarray(f(x)) * np.asarray(weight(x)))

    period = decay.period
    base = period if period else 1.0
    width = 0.5 * base
    if decay.kind == "compact":
        core = decay.rate
    else:
        core = span if span is not None else 32.0 * base
        core = max(core, 4.0 * base)
        if period:
            core = period * math.ceil(core / period)

    pieces_tol = tol / 4.0

    def segment(lo: float, hi: float, t: float) -> tuple[float, float]:
        if origin_power is not None and lo <= 0.0 <= hi:
            h = min(width, hi - lo) if lo == 0.0 or hi == 0.0 else min(width, hi, -lo)
            total, err = 0.0, 0.0
            if hi > 0:
                v, e = _origin_panel(g, min(h, hi), origin_power)
                total, err = total + v, err + e
                if hi > h:
                    v, e = _adaptive(g, _grid(h, hi, width, breakpoints), t, max_evals)
                    total, err = total + v, err + e
            if lo < 0:
                neg = _Counter(lambda x: g.g(-x))
                v, e = _origin_panel(neg, min(h, -lo), origin_power)
                total, err = total + v, err + e
                if -lo > h:
                    v, e = _adaptive(neg, _grid(h, -lo, width, [-p for p in breakpoints]), t, max_evals)
                    total, err = total + v, err + e
                g.n += neg.n
            return total, err
        return _adaptive(g, _grid(lo, hi, width, list(breakpoints) + [0.0]), t, max_evals)

    def chunk(lo: float, hi: float, t: float) -> tuple[float, float]:
        # both tails [lo, hi] and [-hi, -lo]
        v, e = segment(lo, hi, t)
        if even:
            return 2.0 * v, 2.0 * e
        w, d = segment(-hi, -lo, t)
        return v + w, e + d

    if even:
        v, e = segment(0.0, core, pieces_tol / 2)
        value, err = 2.0 * v, 2.0 * e
    else:
        value, err = segment(-core, core, pieces_tol)

    if decay.kind == "compact":
        return IntegralResult(value, err, g.n)

    if decay.kind == "exponential":
        x0, quiet = core, 0
        prev_mag = float(np.max(np.abs(g(np.array([x0, -x0])))))
        for _ in range(60):
            x1 = 2.0 * x0
            v, e = chunk(x0, x1, pieces_tol)
            value, err = value + v, err + e
            mag = float(np.max(np.abs(g(np.array([x1, -x1])))))
            if mag > 10.0 * prev_mag and mag > tol:
                raise DomainError("integrand grows in a tail declared exponentially decaying")
            prev_mag = max(mag, 1e-300)
            quiet = quiet + 1 if abs(v) < tol / 10 else 0
            if quiet >= 2:
                return IntegralResult(value, err + abs(v), g.n)
            x0 = x1
        raise NonConvergence("exponential tail did not settle")

    p = decay.rate
    if not p > 1.0:
        raise DomainError(f"integrand decaying like |x|^-{p:g} is not integrable")
    partial = [value]
    x0 = core
    levels = 5
    table: list[list[float]] = [[value]]
    best, best_err = value, math.inf
    for k in range(1, 16):
        x1 = 2.0 * x0
        v, e = chunk(x0, x1, pieces_tol / 4)
        err += e
        partial.append(partial[-1] + v)
        row = [partial[-1]]
        for m in range(1, min(k, levels) + 1):
            q = p - 1.0 + (m - 1)
            row.append(row[m - 1] + (row[m - 1] - table[k - 1][m - 1]) / (2.0**q - 1.0))
        table.append(row)
        m = len(row) - 1
        if k >= 2:
            cand = row[m]
            cand_err = abs(row[m] - table[k - 1][min(m, len(table[k - 1]) - 1)])
            if cand_err < best_err:
                best, best_err = cand, cand_err
            if best_err + err < tol and k >= 3:
                return IntegralResult(best, best_err + err, g.n)
        x0 = x1
    raise NonConvergence(f"algebraic tail extrapolation reached only {best_err:.3g} (tol {tol:.3g})")


# --------------------------------------------------------------------------
# roots


def find_root(f: Callable[[float], float], bracket: Interval | tuple[float, float], tol: float = 1e-13) -> float:
    """Zero of a continuous real function inside a sign-changing bracket."""
    lo, hi = (bracket.lo, bracket.hi) if isinstance(bracket, Interval) else bracket

    def real(x: float) -> float:
        y = f(x)
        return float(np.real(y))

    flo, fhi = real(lo), real(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise InvalidBracket(f"f({lo})={flo:.3g} and f({hi})={fhi:.3g} have the same sign")
    return float(optimize.brentq(real, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200))


def find_roots_bracketed(
    f: Evaluator,
    fprime: Evaluator | None,
    lo: np.ndarray,
    hi: np.ndarray,
    tol: float = 1e-13,
    max_iter: int = 100,
) -> np.ndarray:
    """Vectorized counterpart of :func:`find_root` for many brackets at once.

    Safeguarded Newton (or false position without a derivative) that never
    leaves the current bracket and falls back to bisection when a step would.
    """
    a = np.asarray(lo, dtype=float).copy()
    b = np.asarray(hi, dtype=float).copy()
    fa = np.real(f(a))
    fb = np.real(f(b))
    if np.any(np.sign(fa) * np.sign(fb) > 0):
        raise InvalidBracket("some brackets do not change sign")
    x = 0.5 * (a + b)
    for _ in range(max_iter):
        fx = np.real(f(x))
        left = np.sign(fx) == np.sign(fa)
        a = np.where(left, x, a)
        fa = np.where(left, fx, fa)
        b = np.where(left, b, x)
        fb = np.where(left, fb, fx)
        if fprime is not None:
            d = np.real(fprime(x))
            with np.errstate(divide="ignore", invalid="ignore"):
                step = x - fx / d
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                step = a - fa * (b - a) / (fb - fa)
        bad = ~np.isfinite(step) | (step <= a) | (step >= b)
        new = np.where(bad, 0.5 * (a + b), step)
        done = (np.abs(new - x) <= tol * np.maximum(1.0, np.abs(x))) | (fx == 0)
        x = np.where(fx == 0, x, new)
        if np.all(done):
            return x
    raise NonConvergence("vectorized root polishing did not converge")


# --------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class RealPolynomial:
    """Dense real polynomial, coefficients in ascending degree."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Sequence[float]):
        c = [float(v) for v in coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c) if c else (0.0,))

    @classmethod
    def from_roots_squared(cls, roots: Sequence[float]) -> "RealPolynomial":
        """prod (x^2 - t^2) over the given t."""
        p = cls([1.0])
        for t in roots:
            p = poly_mul(p, cls([-t * t, 0.0, 1.0]))
        return p

    @classmethod
    def even(cls, even_coeffs: Sequence[float]) -> "RealPolynomial":
        c = np.zeros(2 * len(even_coeffs) - 1 if len(even_coeffs) else 1)
        c[::2] = even_coeffs
        return cls(c)

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def __call__(self, x):
        return poly_eval(self, x)

    def __add__(self, other: "RealPolynomial") -> "RealPolynomial":
        return poly_add(self, other)

    def __mul__(self, other: "RealPolynomial") -> "RealPolynomial":
        return poly_mul(self, other)

    def to_list(self) -> list[float]:
        return list(self.coeffs)


def poly_mul(p: RealPolynomial, q: RealPolynomial) -> RealPolynomial:
    return RealPolynomial(np.convolve(p.coeffs, q.coeffs))


def poly_add(p: RealPolynomial, q: RealPolynomial) -> RealPolynomial:
    n = max(len(p.coeffs), len(q.coeffs))
    out = np.zeros(n)
    out[: len(p.coeffs)] += p.coeffs
    out[: len(q.coeffs)] += q.coeffs
    return RealPolynomial(out)


def poly_eval(p: RealPolynomial, x):
    return np.polynomial.polynomial.polyval(x, p.coeffs)
