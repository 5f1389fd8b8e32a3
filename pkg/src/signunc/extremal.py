"""Sharp constants, extremizers and certificates; the polynomial reduction
to one sign change; the Rayleigh-quotient characterization; constructive
refutation for measures with exponential moments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .debranges import (
    HermiteBiehler,
    kernel,
    kernel_diagonal,
    line_growth,
    measure_factor,
    node_sum,
    t_alpha_zeros,
)
from .kernelbuild import BuiltKernel, IllConditioned, WeightedPWSpace, build_gram
from .measures import Measure, mu_integral
from .numerics import Decay, DomainError, Interval, NumericsError, RealPolynomial

Evaluator = Callable[[np.ndarray], np.ndarray]

_G2 = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])


class NoZero(NumericsError):
    pass


class BudgetExhausted(NumericsError):
    pass


# --------------------------------------------------------------------------
# sharp constant and extremizer


def sharp_constant(hb: HermiteBiehler, horizon: float | None = None) -> float:
    """Smallest positive zero of A, by a phase-guided scan from 0."""
    tau = max(hb.tau, 1e-12)
    horizon = horizon if horizon is not None else 1e4 / tau
    X = 2.0 * math.pi / tau
    while True:
        X = min(X, horizon)
        zeros = t_alpha_zeros(hb, 0.5 * math.pi, Interval(0.0, X))
        zeros = zeros[zeros > 0]
        if zeros.size:
            return float(zeros[0])
        if X >= horizon:
            raise NoZero(f"A has no positive zero below {horizon:g}")
        X *= 4.0


def _divided(f_prime: Evaluator, x: np.ndarray, root: float) -> np.ndarray:
    # (f(x) - f(root))/(x - root) as the mean of f' over the segment
    d = x - root
    return sum(0.5 * np.real(f_prime(root + t * d)) for t in _G2)


def extremizer_decay(hb: HermiteBiehler) -> Decay:
    """Tail class of A^2/(x^2 - xi1^2) from the growth of |E| on the line."""
    growth = line_growth(hb)
    return Decay.polynomial(2.0 - growth, period=math.pi / hb.tau)


@dataclass(frozen=True)
class Extremizer:
    """F(x) = A(x)^2/(x^2 - xi1^2), safe at the removable points +-xi1."""

    hb: HermiteBiehler
    xi1: float
    radius: float = 1e-4

    def quotient(self, x) -> np.ndarray:
        """A(x)/(x - xi1) for x >= 0."""
        x = np.asarray(x, dtype=float)
        near = np.abs(x - self.xi1) < self.radius * max(1.0, self.xi1)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.real(self.hb.A(x)) / (x - self.xi1)
        if near.any():
            q = np.where(near, _divided(self.hb.A_prime, x, self.xi1), q)
        return q

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        q = self.quotient(x)
        return q * q * (x - self.xi1) / (x + self.xi1)

    def cofactor(self, x):
        """H = A^2/(x^2 - xi1^2)^2 >= 0, so that F = (x^2 - xi1^2) H."""
        x = np.abs(np.asarray(x, dtype=float))
        q = self.quotient(x)
        return (q / (x + self.xi1)) ** 2

    @property
    def decay(self) -> Decay:
        return extremizer_decay(self.hb)


def extremizer(hb: HermiteBiehler, xi1: float | None = None) -> Extremizer:
    return Extremizer(hb, sharp_constant(hb) if xi1 is None else float(xi1))


def quadrature_integral(hb: HermiteBiehler, F: Evaluator, alpha: float = 0.0, **kw) -> tuple[float, float]:
    """int F dmu through the node sum over zeros of T_alpha."""
    value, err = node_sum(hb, alpha, F, **kw)
    factor = measure_factor(hb)
    return factor * value, factor * err


# --------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class Certificate:
    xi1: float
    delta: float
    integral_value: float
    integral_error: float
    integral_tol: float
    sign_grid: dict
    vanishing_check: dict
    passed: bool
    reasons: tuple[str, ...] = ()

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {
            "xi1": self.xi1,
            "delta": self.delta,
            "integral_value": self.integral_value,
            "integral_error": self.integral_error,
            "integral_tol": self.integral_tol,
            "sign_grid": self.sign_grid,
            "vanishing_check": self.vanishing_check,
            "verdict": self.verdict,
            "reasons": list(self.reasons),
        }


def certify(
    F: Evaluator,
    mu: Measure,
    xi1: float,
    delta: float,
    tol: float = 1e-8,
    *,
    f_decay: Decay | None = None,
    margin: float = 1e-6,
    x_max_factor: float = 20.0,
    grid_per_xi: int = 500,
) -> Certificate:
    """Audit that F is admissible with r(F) <= xi1: int F dmu <= tol and F >= 0
    on a grid beyond xi1.  The exponential type of F is not checked here."""
    if not xi1 > 0:
        raise ValueError("xi1 must be positive")
    decay = f_decay or getattr(F, "decay", None) or Decay.polynomial(2.0)
    res = mu_integral(mu, F, 0.1 * tol, f_decay=decay)
    h = xi1 / grid_per_xi
    outer = np.arange(xi1 * (1.0 + margin), x_max_factor * xi1 + h, h)
    outer = np.concatenate([-outer[::-1], outer])
    f_out = np.real(F(outer))
    inner = np.linspace(-xi1, xi1, 2 * grid_per_xi + 1)[1:-1]
    f_in = np.real(F(inner))
    reasons = []
    if res.value > tol:
        reasons.append(f"integral {res.value:.3g} exceeds tolerance {tol:.3g}")
    if f_out.min() < -tol:
        reasons.append(f"negative value {f_out.min():.3g} beyond xi1")
    if f_in.max() > tol:
        reasons.append(f"positive value {f_in.max():.3g} inside (-xi1, xi1)")
    return Certificate(
        xi1=float(xi1),
        delta=float(delta),
        integral_value=float(res.value),
        integral_error=float(res.error_estimate),
        integral_tol=float(tol),
        sign_grid={
            "lo": float(xi1 * (1.0 + margin)),
            "hi": float(outer[-1]),
            "step": float(h),
            "points": int(outer.size),
            "min": float(f_out.min()),
        },
        vanishing_check={"points": int(inner.size), "max": float(f_in.max())},
        passed=not reasons,
        reasons=tuple(reasons),
    )


def minimality_probe(ext: Extremizer, mu: Measure, lam: float, tol: float = 1e-10) -> float:
    """int (x^2 - (lam xi1)^2) H dmu with H = A^2/(x^2 - xi1^2)^2.

    This candidate changes sign at lam * xi1 only; a positive value means it
    is not admissible.
    """
    if not 0 < lam < 1:
        raise ValueError("lam must lie in (0, 1)")
    r2 = (lam * ext.xi1) ** 2
    G = lambda x: (np.asarray(x, dtype=float) ** 2 - r2) * ext.cofactor(x)
    return mu_integral(mu, G, tol, f_decay=ext.decay).value


# --------------------------------------------------------------------------
# polynomial reduction


@dataclass(frozen=True)
class EvenPolynomial:
    """sum_k c_k x^(2k)."""

    even_coeffs: tuple[float, ...]

    def __init__(self, even_coeffs: Sequence[float]):
        c = [float(v) for v in even_coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "even_coeffs", tuple(c) if c else (0.0,))

    def degree(self) -> int:
        return 2 * (len(self.even_coeffs) - 1)

    def __call__(self, x):
        y = np.asarray(x, dtype=float) ** 2
        return np.polynomial.polynomial.polyval(y, self.even_coeffs)

    def to_real(self) -> RealPolynomial:
        return RealPolynomial.even(self.even_coeffs)

    def to_list(self) -> list[float]:
        return list(self.even_coeffs)


def poly_reduce(t: Sequence[float], r: float) -> tuple[EvenPolynomial, EvenPolynomial]:
    """prod (x^2 - t_k^2) = (x^2 - r^2) Q + R with Q, R >= 0 on the line."""
    t = [float(v) for v in t]
    r = float(r)
    if not t:
        raise DomainError("need at least one sign-change point")
    if t[0] <= 0 or any(b <= a for a, b in zip(t, t[1:])):
        raise DomainError("points must satisfy 0 < t_1 < ... < t_n")
    if not r > t[-1]:
        raise DomainError("r must exceed the largest point")
    P = np.polynomial.polynomial
    r2 = r * r
    shift = np.array([-r2, 1.0])  # y - r^2 in the variable y = x^2
    shift2 = P.polymul(shift, shift)
    Q = np.array([1.0])
    R = np.array([r2 - t[0] ** 2])
    for tk in t[1:]:
        g = r2 - tk * tk
        Q, R = P.polyadd(R, g * Q), P.polyadd(P.polymul(shift2, Q), g * R)
    return EvenPolynomial(Q), EvenPolynomial(R)


def one_sign_change_form(t: Sequence[float], r: float, F1: Evaluator) -> Evaluator:
    """G = (x^2 - r^2) R F1 with R from :func:`poly_reduce`; G <= F pointwise
    for F = prod (x^2 - t_k^2) (x^2 - r^2) F1 and non-negative F1."""
    r2 = float(r) ** 2
    if len(t) == 0:
        return lambda x: (np.asarray(x, dtype=float) ** 2 - r2) * F1(x)
    _, R = poly_reduce(t, r)
    return lambda x: (np.asarray(x, dtype=float) ** 2 - r2) * R(x) * F1(x)


# --------------------------------------------------------------------------
# Rayleigh quotients


def rayleigh_min(
    hb: HermiteBiehler,
    basis: Sequence[float] | None = None,
    window: Interval | None = None,
) -> float:
    """min ||x U|| / ||U|| over U in the span of kernel sections K(xi, .).

    ``basis`` defaults to the zeros of A in ``window``.  Both Gram matrices
    are node sums over the zeros of A in the window, which reproduce the
    space norm because those zeros carry an orthogonal set of kernels.
    """
    if basis is None:
        if window is None:
            raise ValueError("need a basis or a window")
        basis = t_alpha_zeros(hb, 0.5 * math.pi, window)
    xi = np.asarray(basis, dtype=float)
    if xi.size == 0:
        raise ValueError("empty basis")
    win = window or Interval(float(xi.min()) - 1.0, float(xi.max()) + 1.0)
    nodes = t_alpha_zeros(hb, 0.5 * math.pi, win)
    w = 1.0 / kernel_diagonal(hb, nodes)
    Kx = np.real(kernel(hb, xi[:, None], nodes[None, :]))
    G = (Kx * w) @ Kx.T
    Gx = (Kx * (w * nodes**2)) @ Kx.T
    G = 0.5 * (G + G.T)
    Gx = 0.5 * (Gx + Gx.T)
    cond = np.linalg.cond(G)
    if not cond < 1e12:
        raise IllConditioned(f"node Gram matrix condition number {cond:.3g}")
    ev = scipy.linalg.eigh(Gx, G, eigvals_only=True)
    return float(math.sqrt(max(ev[0], 0.0)))


def weighted_rayleigh_min(bk: BuiltKernel) -> float:
    """Ritz value of min ||x U||_mu / ||U||_mu over U = sum c_n s_n with
    sum (-1)^n c_n = 0, using only the weighted Gram matrix.

    With v_n = s_n + s_{n+1} one has x v_n = (pi/tau)(n s_n + (n+1) s_{n+1}),
    so both quadratic forms are exact in the cardinal basis.  This is an
    upper bound for the sharp constant that does not use E or its zeros.
    """
    sp = bk.space
    idx = sp.indices
    n = idx.size
    V = np.zeros((n, n - 1))
    XV = np.zeros((n, n - 1))
    for j in range(n - 1):
        V[j, j] = V[j + 1, j] = 1.0
        XV[j, j] = idx[j]
        XV[j + 1, j] = idx[j + 1]
    XV *= math.pi / sp.tau
    G = bk.gram
    M = V.T @ G @ V
    Mx = XV.T @ G @ XV
    ev = scipy.linalg.eigh(0.5 * (Mx + Mx.T), 0.5 * (M + M.T), eigvals_only=True)
    return float(math.sqrt(ev[0]))


def weighted_rayleigh_extrapolated(mu: Measure, tau: float, basis_size: int = 40, tol: float = 1e-10) -> tuple[float, float]:
    """Ritz values at basis sizes N and 2N, extrapolated as R(N) ~ R + c/N.

    The truncated cardinal expansion of the extremizer loses mass like 1/N,
    which is the observed rate of the plain Ritz bound.  Returns
    ``(extrapolated, |R(2N) - extrapolated|)``.
    """
    r1 = weighted_rayleigh_min(build_gram(WeightedPWSpace(tau, mu, basis_size), tol))
    r2 = weighted_rayleigh_min(build_gram(WeightedPWSpace(tau, mu, 2 * basis_size), tol))
    est = 2.0 * r2 - r1
    return est, abs(r2 - est)


# --------------------------------------------------------------------------
# constructive refutation


@dataclass(frozen=True)
class CounterexampleResult:
    r: float
    poly: RealPolynomial
    objective: float
    eta: float
    degree: int
    history: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if not self.objective < 0:
            raise ValueError("a counterexample needs a negative objective")

    def witness(self) -> Evaluator:
        """F(x) = (x^2 - r^2) P(x)^2."""
        r2 = self.r**2
        return lambda x: (np.asarray(x, dtype=float) ** 2 - r2) * self.poly(x) ** 2

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "degree": self.degree,
            "coefficients": self.poly.to_list(),
            "objective": self.objective,
            "eta": self.eta,
            "history": [list(h) for h in self.history],
        }


@dataclass
class _Discrete:
    """Discretization of mu on [0, X] with both half-lines folded together."""

    x: np.ndarray
    w: np.ndarray  # weights of mu (even extension)


def _discretize(mu: Measure, r: float, max_degree: int) -> _Discrete:
    d = mu.decay
    if d.kind == "compact":
        X = d.rate
    elif d.kind == "exponential":
        # x^(2 max_degree + 2) exp(-eps x) is negligible past this point
        X = (2.0 * max_degree + 2.0 + 120.0) / d.rate
    else:
        raise DomainError(f"{mu.label}: counterexample needs exponential or compact decay")
    panel = min(0.5, X / 8.0)
    edges = np.unique(np.concatenate([np.arange(0.0, X, panel), [X], [r] if r < X else []]))
    t, w = np.polynomial.legendre.leggauss(30)
    a, b = edges[:-1], edges[1:]
    x = (0.5 * (a + b))[:, None] + (0.5 * (b - a))[:, None] * t
    wx = (0.5 * (b - a))[:, None] * w
    x, wx = x.ravel(), wx.ravel() * 2.0 * mu.W(x.ravel())
    if mu.atoms:
        loc = np.array([abs(a[0]) for a in mu.atoms])
        mass = np.array([a[1] for a in mu.atoms])
        x = np.concatenate([x, loc])
        wx = np.concatenate([wx, mass])
    keep = wx > 0
    return _Discrete(x[keep], wx[keep])


def _lanczos(y: np.ndarray, w: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal polynomials in y for the discrete weights w.

    Returns the matrix of sqrt(w) p_j(y_k) and the recurrence coefficients
    y p_j = b_{j+1} p_{j+1} + a_j p_j + b_j p_{j-1}.
    """
    Q = np.zeros((n, y.size))
    a = np.zeros(n)
    b = np.zeros(n)
    q = np.sqrt(w)
    b0 = np.linalg.norm(q)
    Q[0] = q / b0
    for j in range(1, n):
        v = y * Q[j - 1]
        for _ in range(2):
            v -= Q[:j].T @ (Q[:j] @ v)
        a[j - 1] = Q[j - 1] @ (y * Q[j - 1])
        b[j] = np.linalg.norm(v)
        Q[j] = v / b[j]
    a[n - 1] = Q[n - 1] @ (y * Q[n - 1])
    b[0] = b0
    return Q, a, b


def _monomials(a: np.ndarray, b: np.ndarray, coef: np.ndarray) -> np.ndarray:
    """Coefficients in y of sum coef_j p_j from the three-term recurrence."""
    P = np.polynomial.polynomial
    prev = np.array([0.0])
    cur = np.array([1.0 / b[0]])
    total = coef[0] * cur
    for j in range(1, coef.size):
        nxt = P.polysub(P.polysub(P.polymul([0.0, 1.0], cur), a[j - 1] * cur), b[j - 1] * prev if j > 1 else 0.0)
        nxt = nxt / b[j]
        prev, cur = cur, nxt
        total = P.polyadd(total, coef[j] * cur)
    return total


def counterexample(
    mu: Measure,
    r: float,
    max_degree: int = 40,
    *,
    method: str = "lsq",
) -> CounterexampleResult:
    """Even polynomial P with int (x^2 - r^2) P^2 dmu < 0.

    ``method='lsq'`` fits P to the indicator of [-r, r] in L^2((1 + x^2) dmu)
    at increasing even degree.  ``method='ritz'`` instead takes, at each
    degree, the minimizer of the objective over the unit sphere of L^2(mu).
    The smallest successful degree is returned.
    """
    if mu.decay.kind not in ("exponential", "compact"):
        raise DomainError(f"{mu.label}: needs exponential or compact decay")
    if not r > 0:
        raise ValueError("r must be positive")
    if max_degree < 0:
        raise ValueError("max_degree must be non-negative")
    if method not in ("lsq", "ritz"):
        raise ValueError(f"unknown method {method!r}")
    disc = _discretize(mu, r, max_degree)
    y = disc.x**2
    w1 = disc.w * (1.0 + y)
    m = max_degree // 2 + 1
    m = min(m, y.size)
    Q, a, b = _lanczos(y, w1, m)
    target = np.sqrt(w1) * (disc.x <= r)
    proj = Q @ target
    sq = np.sqrt(w1)
    history = []
    for k in range(1, m + 1):
        if method == "lsq":
            coef = proj[:k].copy()
        else:
            # objective in the orthonormal basis of mu_1
            B = Q[:k] / sq
            Jm = (B * (disc.w * (y - r * r))) @ B.T
            Mm = (B * disc.w) @ B.T
            vals, vecs = scipy.linalg.eigh(0.5 * (Jm + Jm.T), 0.5 * (Mm + Mm.T))
            coef = vecs[:, 0]
            # scale to the least-squares size so objectives are comparable
            coef *= np.linalg.norm(proj[:k]) / np.linalg.norm(coef)
        values = (coef @ Q[:k]) / sq
        J = float(np.sum((y - r * r) * values**2 * disc.w))
        history.append((2 * (k - 1), J))
        if J < 0:
            eta = float(np.sqrt(max(np.sum(w1 * (values - (disc.x <= r)) ** 2), 0.0)))
            ycoef = _monomials(a, b, coef)
            return CounterexampleResult(
                r=float(r),
                poly=RealPolynomial.even(ycoef),
                objective=J,
                eta=eta,
                degree=2 * (k - 1),
                history=tuple(history),
            )
    best = min(h[1] for h in history)
    raise BudgetExhausted(
        f"no even polynomial of degree <= {max_degree} gave a negative objective (best {best:.4g})",
    ) from None


def counterexample_history(mu: Measure, r: float, max_degree: int = 40, method: str = "lsq") -> list[tuple[int, float]]:
    """Objective at every even degree up to ``max_degree`` without stopping early."""
    disc = _discretize(mu, r, max_degree)
    y = disc.x**2
    w1 = disc.w * (1.0 + y)
    m = min(max_degree // 2 + 1, y.size)
    Q, _, _ = _lanczos(y, w1, m)
    sq = np.sqrt(w1)
    proj = Q @ (sq * (disc.x <= r))
    out = []
    for k in range(1, m + 1):
        if method == "lsq":
            values = (proj[:k] @ Q[:k]) / sq
            out.append((2 * (k - 1), float(np.sum((y - r * r) * values**2 * disc.w))))
        else:
            B = Q[:k] / sq
            Jm = (B * (disc.w * (y - r * r))) @ B.T
            Mm = (B * disc.w) @ B.T
            out.append((2 * (k - 1), float(scipy.linalg.eigh(Jm, Mm, eigvals_only=True)[0])))
    return out


def smallest_reachable_radius(mu: Measure, degree: int) -> float:
    """min over even P of degree <= ``degree`` of sqrt(int x^2 P^2 dmu / int P^2 dmu).

    A counterexample with radius r at this degree exists iff r exceeds it.
    """
    disc = _discretize(mu, 0.0, degree)
    y = disc.x**2
    m = min(degree // 2 + 1, y.size)
    Q, a, b = _lanczos(y, disc.w, m)
    # Jacobi matrix of multiplication by y in the orthonormal basis
    T = np.diag(a[:m]) + np.diag(b[1:m], 1) + np.diag(b[1:m], -1)
    return float(math.sqrt(max(np.linalg.eigvalsh(T)[0], 0.0)))
