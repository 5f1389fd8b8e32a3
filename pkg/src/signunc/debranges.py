"""Hermite-Biehler structure functions, reproducing kernels, phase
functions, zero sets of T_alpha and the associated quadrature rules."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import special
from .numerics import Decay, Interval, NumericsError, find_roots_bracketed, integrate_weighted

ComplexEvaluator = Callable[[np.ndarray], np.ndarray]

CONFLUENT_RADIUS = 1e-4
# two-point Gauss nodes on [0, 1]
_G2 = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])


class ScanTooCoarse(NumericsError):
    pass


def _c(z) -> np.ndarray:
    return np.asarray(z, dtype=complex)


@dataclass(frozen=True)
class HermiteBiehler:
    """E = A - iB together with its companion functions.

    All evaluators are numpy-vectorized and accept complex arrays.  ``E``
    defaults to ``A - iB``; it is stored separately only so a deliberately
    inconsistent function can be wrapped for testing.
    """

    A: ComplexEvaluator
    B: ComplexEvaluator
    A_prime: ComplexEvaluator
    B_prime: ComplexEvaluator
    tau: float
    label: str = ""
    E: ComplexEvaluator | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def e(self, z):
        z = _c(z)
        if self.E is not None:
            return self.E(z)
        return self.A(z) - 1j * self.B(z)

    def e_star(self, z):
        return np.conj(self.e(np.conj(_c(z))))

    def scaled(self, s: float, label: str | None = None) -> "HermiteBiehler":
        """z -> E(s z); exponential type becomes s * tau."""
        s = float(s)
        if not s > 0:
            raise ValueError("scale must be positive")
        A, B, Ap, Bp, E = self.A, self.B, self.A_prime, self.B_prime, self.E
        return HermiteBiehler(
            A=lambda z: A(s * _c(z)),
            B=lambda z: B(s * _c(z)),
            A_prime=lambda z: s * Ap(s * _c(z)),
            B_prime=lambda z: s * Bp(s * _c(z)),
            tau=s * self.tau,
            label=label or f"{self.label}(x{s:g})",
            E=None if E is None else (lambda z: E(s * _c(z))),
            meta=dict(self.meta, scale=s * self.meta.get("scale", 1.0)),
        )


def paley_wiener(tau: float = 1.0) -> HermiteBiehler:
    """E(z) = exp(-i tau z): Lebesgue measure, space of type tau."""
    t = float(tau)
    return HermiteBiehler(
        A=lambda z: np.cos(t * _c(z)),
        B=lambda z: np.sin(t * _c(z)),
        A_prime=lambda z: -t * np.sin(t * _c(z)),
        B_prime=lambda z: t * np.cos(t * _c(z)),
        tau=t,
        label=f"paley_wiener({t:g})",
        meta={"kind": "paley_wiener"},
    )


def homogeneous(nu: float, scale: float = 1.0) -> HermiteBiehler:
    """E_nu(scale * z) built from the normalized Bessel functions."""
    special._check_order(nu)
    hb = HermiteBiehler(
        A=lambda z: special.A_nu(nu, z),
        B=lambda z: special.B_nu(nu, z),
        A_prime=lambda z: special.A_nu_prime(nu, z),
        B_prime=lambda z: special.B_nu_prime(nu, z),
        tau=1.0,
        label=f"E_{nu:g}",
        meta={"kind": "homogeneous", "nu": float(nu)},
    )
    return hb if scale == 1.0 else hb.scaled(scale, f"E_{nu:g}(x{scale:g})")


def flipped_exponential() -> HermiteBiehler:
    """E(z) = exp(+iz).  Not Hermite-Biehler; used to exercise failure paths."""
    return HermiteBiehler(
        A=lambda z: np.cos(_c(z)),
        B=lambda z: -np.sin(_c(z)),
        A_prime=lambda z: -np.sin(_c(z)),
        B_prime=lambda z: -np.cos(_c(z)),
        tau=1.0,
        label="flipped_exponential",
        meta={"kind": "flipped"},
    )


def line_growth(hb: HermiteBiehler) -> float:
    """Exponent g with |E(x)|^2 ~ |x|^g on the real line (0 unless homogeneous)."""
    if hb.meta.get("kind") == "homogeneous":
        return -(2.0 * hb.meta["nu"] + 1.0)
    return 0.0


def measure_factor(hb: HermiteBiehler) -> float:
    """Constant c with int F dmu = c * int F |E|^-2 dx for the measure paired with E.

    For E_nu(s z) and mu = |x|^(2 nu + 1) dx this is 1/(c_nu s^(2 nu + 1)).
    """
    if hb.meta.get("kind") == "homogeneous":
        nu = hb.meta["nu"]
        s = hb.meta.get("scale", 1.0)
        return 1.0 / (special.norm_constant(nu) * s ** (2.0 * nu + 1.0))
    return 1.0


# --------------------------------------------------------------------------
# kernel


def kernel(hb: HermiteBiehler, w, z):
    """K(w, z) = [B(z) A(w*) - A(z) B(w*)] / (pi (z - w*)), broadcasting.

    The value is averaged with the mirrored evaluation conj K(z, w), so
    Hermitian symmetry holds exactly as evaluated.
    """
    w, z = np.broadcast_arrays(_c(w), _c(z))
    out = 0.5 * (_kernel_raw(hb, w, z) + np.conj(_kernel_raw(hb, z, w)))
    return out[()] if out.ndim == 0 else out


def _kernel_raw(hb: HermiteBiehler, w: np.ndarray, z: np.ndarray) -> np.ndarray:
    u = np.conj(w)
    d = z - u
    Au, Bu = hb.A(u), hb.B(u)
    out = np.array((hb.B(z) * Au - hb.A(z) * Bu) / (math.pi * np.where(d == 0, 1.0, d)), dtype=complex, ndmin=1)
    near = np.atleast_1d(np.abs(d) < CONFLUENT_RADIUS)
    if np.any(near):
        out[near] = _confluent(hb, np.atleast_1d(w)[near], np.atleast_1d(z)[near])
    return out.reshape(np.shape(d))


def _confluent(hb: HermiteBiehler, w: np.ndarray, z: np.ndarray) -> np.ndarray:
    # N(z)/(z-u) = int_0^1 N'(u + t(z-u)) dt with N' = B'(.)A(u) - A'(.)B(u);
    # two Gauss points make the error O(|z-u|^4)
    u = np.conj(w)
    d = z - u
    Au, Bu = hb.A(u), hb.B(u)
    acc = 0.0
    for t in _G2:
        p = u + t * d
        acc = acc + 0.5 * (hb.B_prime(p) * Au - hb.A_prime(p) * Bu)
    return acc / math.pi


def kernel_diagonal(hb: HermiteBiehler, x):
    """K(x, x) = (B'A - A'B)/pi for real x, as a real array."""
    x = _c(x)
    return np.real(hb.B_prime(x) * hb.A(x) - hb.A_prime(x) * hb.B(x)) / math.pi


def phase_derivative(hb: HermiteBiehler, x):
    """phi'(x) = pi K(x, x) / |E(x)|^2."""
    x = np.asarray(x, dtype=float)
    a, b = np.real(hb.A(x)), np.real(hb.B(x))
    return math.pi * kernel_diagonal(hb, x) / (a * a + b * b)


def t_alpha(hb: HermiteBiehler, alpha: float, z):
    """T_alpha = [e^{ia} E - e^{-ia} E*]/(2i) = sin(a) A - cos(a) B."""
    z = _c(z)
    return math.sin(alpha) * hb.A(z) - math.cos(alpha) * hb.B(z)


def t_alpha_prime(hb: HermiteBiehler, alpha: float, z):
    z = _c(z)
    return math.sin(alpha) * hb.A_prime(z) - math.cos(alpha) * hb.B_prime(z)


# --------------------------------------------------------------------------
# zeros and quadrature


def _scan_grid(hb: HermiteBiehler, window: Interval, frac: float) -> np.ndarray:
    """Grid whose local step is ``frac * pi / phi'``, built from a probe."""
    lo, hi = window.lo, window.hi
    probe = np.linspace(lo, hi, 513)
    dphi = np.maximum(phase_derivative(hb, probe), 1e-12)
    # phase gained per probe cell, bounded from above by the larger endpoint
    cell = np.maximum(dphi[:-1], dphi[1:]) * np.diff(probe)
    steps = np.maximum(1, np.ceil(cell / (frac * math.pi))).astype(int)
    pieces = [np.linspace(probe[i], probe[i + 1], steps[i] + 1)[:-1] for i in range(probe.size - 1)]
    return np.concatenate(pieces + [np.array([hi])])


def t_alpha_zeros(
    hb: HermiteBiehler, alpha: float, window: Interval, *, max_halvings: int = 20
) -> np.ndarray:
    """All zeros of T_alpha in the window, increasing.

    Zeros solve phi = alpha (mod pi).  The scan step is a quarter of the
    local phase period, so each cell holds at most one zero; the step is
    halved when a cell gains too much phase or the sign changes disagree
    with the unwrapped phase.
    """
    frac = 0.25
    for _ in range(max_halvings + 1):
        x = _scan_grid(hb, window, frac)
        e = hb.e(x)
        if np.any(e == 0):
            raise ScanTooCoarse("E vanishes on the real axis")
        inc = -np.angle(e[1:] / e[:-1])
        # the phase is increasing; with less than pi/2 gained per cell, T_alpha
        # changes sign at most once in a cell
        if np.any(np.abs(inc) > 0.5 * math.pi) or np.any(inc < -1e-12):
            frac *= 0.5
            continue
        t = np.real(t_alpha(hb, alpha, x))
        exact = t == 0.0
        sign_change = np.sign(t[:-1]) * np.sign(t[1:]) < 0
        # global cross-check against the number of phase crossings; rounding
        # at the two window ends can shift it by one each
        phi = -np.angle(e[0]) + np.concatenate([[0.0], np.cumsum(inc)])
        crossings = int(np.floor((phi[-1] - alpha) / math.pi) - np.floor((phi[0] - alpha) / math.pi))
        found = int(sign_change.sum() + exact.sum())
        if abs(found - crossings) > 2:
            frac *= 0.5
            continue
        idx = np.nonzero(sign_change)[0]
        roots = [x[exact]]
        if idx.size:
            f = lambda s: t_alpha(hb, alpha, s)
            fp = lambda s: t_alpha_prime(hb, alpha, s)
            roots.append(find_roots_bracketed(f, fp, x[idx], x[idx + 1]))
        out = np.sort(np.concatenate(roots))
        return out[(out >= window.lo) & (out <= window.hi)]
    raise ScanTooCoarse(f"phase scan still inconsistent after {max_halvings} halvings")


@dataclass(frozen=True)
class QuadratureRule:
    alpha: float
    nodes: np.ndarray
    weights: np.ndarray
    window: Interval

    def __post_init__(self):
        if self.nodes.size > 1 and np.any(np.diff(self.nodes) <= 0):
            raise ValueError("quadrature nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
            "window": self.window.to_list(),
        }


def quadrature_rule(hb: HermiteBiehler, alpha: float, window: Interval) -> QuadratureRule:
    nodes = t_alpha_zeros(hb, alpha, window)
    weights = 1.0 / kernel_diagonal(hb, nodes)
    return QuadratureRule(float(alpha), nodes, weights, window)


def apply_quadrature(rule: QuadratureRule, F: Callable[[np.ndarray], np.ndarray]) -> float:
    if rule.nodes.size == 0:
        return 0.0
    return float(np.sum(np.real(F(rule.nodes)) * rule.weights))


@functools.lru_cache(maxsize=16)
def _reaching_rule(hb: HermiteBiehler, alpha: float, reach: int) -> QuadratureRule:
    """Rule over a symmetric window holding more than ``reach`` nodes per side."""
    X = math.pi / max(hb.tau, 1e-300) * (reach + 4)
    while True:
        rule = quadrature_rule(hb, alpha, Interval(-X, X))
        if rule.nodes[rule.nodes > 0].size > reach and rule.nodes[rule.nodes < 0].size > reach:
            return rule
        X *= 1.5


def node_sum(
    hb: HermiteBiehler,
    alpha: float,
    F: Callable[[np.ndarray], np.ndarray],
    *,
    n_nodes: int = 256,
    levels: int = 4,
    tail_power: float = 2.0,
) -> tuple[float, float]:
    """Quadrature sum over all nodes, with the node tail extrapolated.

    Partial sums over the first ``n, 2n, 4n, ...`` nodes on each side are
    Richardson-extrapolated assuming the terms decay like
    ``index^-tail_power``.  Returns ``(value, error_estimate)``.
    """
    rule = _reaching_rule(hb, float(alpha), n_nodes * 2 ** (levels - 1))
    terms = np.real(F(rule.nodes)) * rule.weights
    nodes = rule.nodes
    zero_part = float(terms[nodes == 0].sum())
    tp = terms[nodes > 0]
    tn = terms[nodes < 0][::-1]
    sums = []
    for lvl in range(levels):
        m = n_nodes * 2**lvl
        sums.append(zero_part + tp[:m].sum() + tn[:m].sum())
    table = [sums]
    for j in range(1, levels):
        q = tail_power - 1.0 + (j - 1)
        prev = table[-1]
        table.append([prev[i + 1] + (prev[i + 1] - prev[i]) / (2.0**q - 1.0) for i in range(len(prev) - 1)])
    value = table[-1][-1]
    err = abs(table[-1][-1] - table[-2][-1])
    return float(value), float(err)


# --------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class HBReport:
    label: str
    samples: int
    seed: int
    min_gap: float
    passed: bool
    reason: str

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "samples": self.samples,
            "seed": self.seed,
            "min_gap": self.min_gap,
            "passed": self.passed,
            "reason": self.reason,
        }


def verify_hb(hb: HermiteBiehler, samples: int = 200, seed: int = 0) -> HBReport:
    """Sample |E(z)| - |E*(z)| on 0 < Im z <= 5, |Re z| <= 20, and the
    structural conditions (E = A - iB, parity, no real zeros) on the line."""
    if samples <= 0:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    z = rng.uniform(-20.0, 20.0, samples) + 1j * rng.uniform(0.0, 5.0, samples)
    z = np.where(z.imag == 0, z + 1e-3j, z)
    gap = np.abs(hb.e(z)) - np.abs(hb.e_star(z))
    min_gap = float(np.min(gap))
    reasons = []
    if not min_gap > 0:
        reasons.append("HB inequality violated")
    x = rng.uniform(-20.0, 20.0, samples)
    a, b = hb.A(x), hb.B(x)
    scale = np.abs(a) + np.abs(b)
    if np.max(np.abs(hb.e(z) - (hb.A(z) - 1j * hb.B(z))) / (np.abs(hb.e(z)) + 1e-300)) > 1e-8:
        reasons.append("E differs from A - iB")
    if np.max(np.abs(hb.A(-x) - a) / scale) > 1e-8 or np.max(np.abs(hb.B(-x) + b) / scale) > 1e-8:
        reasons.append("A not even or B not odd")
    if np.max(np.abs(a.imag) + np.abs(b.imag)) > 1e-8 * np.max(scale):
        reasons.append("A or B not real on the real line")
    if not np.min(np.abs(a) ** 2 + np.abs(b) ** 2) > 0:
        reasons.append("E has a real zero")
    passed = not reasons
    return HBReport(hb.label, int(samples), int(seed), min_gap, passed, "; ".join(reasons) or "ok")


# --------------------------------------------------------------------------
# exactness and Parseval trials


@dataclass(frozen=True)
class KernelCombination:
    """U(z) = sum c_j K(w_j, z) with real centres and real coefficients."""

    hb: HermiteBiehler
    centres: np.ndarray
    coeffs: np.ndarray

    def __call__(self, z):
        z = _c(z)
        out = np.zeros(z.shape, dtype=complex)
        # one-sided evaluation: symmetry is not needed here and halves the cost
        for w, c in zip(self.centres, self.coeffs):
            out = out + c * _kernel_raw(self.hb, np.full(z.shape, w, dtype=complex), z)
        return out

    def norm_squared(self) -> float:
        """||U||^2 = sum c_i c_j K(w_i, w_j), from the reproducing property."""
        W = kernel(self.hb, self.centres[:, None], self.centres[None, :])
        return float(np.real(self.coeffs @ W @ self.coeffs))

    def product(self) -> Callable[[np.ndarray], np.ndarray]:
        """F = U U*, which is |U|^2 on the real line."""
        return lambda x: np.abs(self(np.asarray(x, dtype=float))) ** 2


def random_kernel_combination(hb: HermiteBiehler, size: int, rng: np.random.Generator, spread: float = 5.0) -> KernelCombination:
    centres = rng.uniform(-spread, spread, size) / max(hb.tau, 1e-12)
    coeffs = rng.standard_normal(size)
    return KernelCombination(hb, centres, coeffs)


def weighted_integral(hb: HermiteBiehler, F: Callable[[np.ndarray], np.ndarray], tol: float = 1e-11) -> float:
    """int F(x) |E(x)|^-2 dx for F = U U* with U in the space (tails ~ x^-2)."""
    weight = lambda x: 1.0 / np.abs(hb.e(x)) ** 2
    decay = Decay.polynomial(2.0, period=math.pi / hb.tau)
    return integrate_weighted(lambda x: np.real(F(x)), weight, decay, tol).value


@dataclass(frozen=True)
class QuadCheckReport:
    label: str
    hb: HBReport
    exactness_gaps: tuple[float, ...]
    parseval_gaps: tuple[float, ...]
    tol: float
    alphas: tuple[float, ...]

    @property
    def passed(self) -> bool:
        gaps = self.exactness_gaps + self.parseval_gaps
        return self.hb.passed and all(g < self.tol for g in gaps)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "verify_hb": self.hb.to_dict(),
            "alphas": list(self.alphas),
            "exactness_max_gap": max(self.exactness_gaps, default=0.0),
            "parseval_max_gap": max(self.parseval_gaps, default=0.0),
            "tol": self.tol,
            "passed": self.passed,
        }


def quadrature_check(
    hb: HermiteBiehler,
    trials: int = 5,
    size: int = 5,
    tol: float = 1e-6,
    seed: int = 0,
    alphas: tuple[float, ...] = (0.0, 0.5 * math.pi),
) -> QuadCheckReport:
    """Node sums of U U* against the weighted integral (exactness) and
    against the kernel Gram form of ||U||^2 (Parseval), as relative gaps."""
    report = verify_hb(hb, seed=seed)
    if not report.passed:
        return QuadCheckReport(hb.label, report, (), (), tol, tuple(alphas))
    rng = np.random.default_rng(seed)
    exact, pars = [], []
    for _ in range(trials):
        U = random_kernel_combination(hb, size, rng)
        F = U.product()
        ref = weighted_integral(hb, F)
        gram = U.norm_squared()
        for a in alphas:
            val, _ = node_sum(hb, a, F)
            exact.append(abs(val - ref) / abs(ref))
            pars.append(abs(val - gram) / abs(gram))
    return QuadCheckReport(hb.label, report, tuple(exact), tuple(pars), tol, tuple(alphas))
