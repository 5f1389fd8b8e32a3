"""Even measures on the real line: a density, optional point masses and a
declared tail class."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .numerics import Decay, DomainError, IntegralResult, integrate_weighted

Evaluator = Callable[[np.ndarray], np.ndarray]

KS_SYMMETRIES = ("U", "Sp", "O", "SOeven", "SOodd")


def sinc2pi(x):
    """sin(2 pi x)/(2 pi x), total at 0."""
    x = np.asarray(x, dtype=float)
    y = 2.0 * math.pi * x
    small = np.abs(x) < 1e-3
    with np.errstate(invalid="ignore", divide="ignore"):
        big = np.sin(y) / np.where(small, 1.0, y)
    y2 = y * y
    series = 1.0 - y2 / 6.0 + y2 * y2 / 120.0
    return np.where(small, series, big)


@dataclass(frozen=True)
class Measure:
    """dmu = W(x) dx + sum of point masses, symmetric about 0.

    ``decay`` is the tail class of W (``polynomial(0)`` for densities that
    tend to a constant).  ``origin_power = s`` records W ~ |x|^s at 0 for
    non-smooth weights.  ``level`` is the constant W tends to at infinity,
    when it does; ``perturbation_decay`` then describes W - level.
    """

    density: Evaluator | None
    decay: Decay
    label: str
    kind: str = "density"
    atoms: tuple[tuple[float, float], ...] = ()
    origin_power: float | None = None
    level: float | None = None
    perturbation_decay: Decay | None = None
    nu: float | None = None
    even: bool = True
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.even:
            raise DomainError("only even measures are supported")
        locs = sorted(a[0] for a in self.atoms)
        for loc, mass in self.atoms:
            if not mass > 0:
                raise DomainError("atom masses must be positive")
            if loc != 0 and not any(abs(l + loc) < 1e-14 for l in locs):
                raise DomainError(f"atom at {loc} has no mirror image")
        if self.density is not None:
            x = np.linspace(0.013, 37.1, 257)
            w = np.asarray(self.density(x), dtype=float)
            if np.any(w < 0):
                raise DomainError("density is negative somewhere")
            if np.max(np.abs(w - self.density(-x))) > 1e-12 * (1 + np.max(np.abs(w))):
                raise DomainError("density is not even")

    def W(self, x):
        if self.density is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return np.asarray(self.density(np.asarray(x, dtype=float)), dtype=float)

    def without_atoms(self) -> "Measure":
        return replace(self, atoms=(), kind="density" if self.kind == "density+atoms" else self.kind)

    def perturbation(self, x):
        """W(x) - level."""
        if self.level is None:
            raise DomainError(f"{self.label} has no asymptotic constant level")
        return self.W(x) - self.level

    def to_dict(self) -> dict:
        out = {
            "label": self.label,
            "kind": self.kind,
            "atoms": [list(a) for a in self.atoms],
            "decay": self.decay.to_dict(),
        }
        if self.nu is not None:
            out["nu"] = self.nu
        return out


def lebesgue() -> Measure:
    return Measure(
        lambda x: np.ones_like(np.asarray(x, dtype=float)),
        Decay.polynomial(0.0),
        "lebesgue",
        level=1.0,
        perturbation_decay=Decay.compact(1.0),
    )


def power_weight(nu: float) -> Measure:
    """d mu_nu = |x|^(2 nu + 1) dx."""
    nu = float(nu)
    if not nu > -1.0:
        raise DomainError(f"power weight needs nu > -1, got {nu}")
    s = 2.0 * nu + 1.0
    if s == 0.0:
        m = lebesgue()
        return replace(m, label="power:-0.5", kind="power", nu=nu)
    return Measure(
        lambda x: np.abs(np.asarray(x, dtype=float)) ** s,
        Decay.polynomial(-s),
        f"power:{nu:g}",
        kind="power",
        origin_power=s,
        nu=nu,
    )


def katz_sarnak(symmetry: str) -> Measure:
    """The five one-level densities; O and SOodd carry a point mass at 0."""
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))
    pert = Decay.polynomial(1.0, period=1.0)
    if symmetry == "U":
        return Measure(one, Decay.polynomial(0.0), "ks:U", level=1.0, perturbation_decay=Decay.compact(1.0))
    if symmetry == "Sp":
        dens, atoms = (lambda x: 1.0 - sinc2pi(x)), ()
    elif symmetry == "O":
        dens, atoms, pert = one, ((0.0, 0.5),), Decay.compact(1.0)
    elif symmetry == "SOeven":
        dens, atoms = (lambda x: 1.0 + sinc2pi(x)), ()
    elif symmetry == "SOodd":
        dens, atoms = (lambda x: 1.0 - sinc2pi(x)), ((0.0, 1.0),)
    else:
        raise DomainError(f"unknown symmetry type {symmetry!r}; expected one of {KS_SYMMETRIES}")
    return Measure(
        dens,
        Decay.polynomial(0.0, period=1.0),
        f"ks:{symmetry}",
        kind="density+atoms" if atoms else "density",
        atoms=atoms,
        level=1.0,
        perturbation_decay=pert,
        params={"symmetry": symmetry},
    )


def exp_decay(eps: float) -> Measure:
    """d mu = exp(-eps |x|) dx."""
    eps = float(eps)
    if not eps > 0:
        raise DomainError("exponential rate must be positive")
    return Measure(
        lambda x: np.exp(-eps * np.abs(np.asarray(x, dtype=float))),
        Decay.exponential(eps),
        f"expdecay:{eps:g}",
        params={"eps": eps},
    )


def uniform(radius: float) -> Measure:
    """Lebesgue measure restricted to [-radius, radius]."""
    R = float(radius)
    return Measure(
        lambda x: (np.abs(np.asarray(x, dtype=float)) <= R).astype(float),
        Decay.compact(R),
        f"uniform:{R:g}",
        params={"radius": R},
    )


def parse_measure(spec: str) -> Measure:
    """lebesgue | power:<nu> | ks:<G> | expdecay:<eps> | uniform:<R>."""
    name, _, arg = spec.partition(":")
    try:
        if name == "lebesgue" and not arg:
            return lebesgue()
        if name == "power":
            return power_weight(float(arg))
        if name == "ks":
            return katz_sarnak(arg)
        if name == "expdecay":
            return exp_decay(float(arg))
        if name == "uniform":
            return uniform(float(arg))
    except ValueError as exc:
        raise DomainError(f"bad measure spec {spec!r}: {exc}") from exc
    raise DomainError(f"unknown measure spec {spec!r}")


def mu_integral(
    mu: Measure,
    f: Evaluator,
    tol: float = 1e-10,
    *,
    f_decay: Decay = Decay.polynomial(2.0),
    even: bool = False,
    span: float | None = None,
    period: float | None = None,
) -> IntegralResult:
    """int f dmu = int f W dx + sum mass * f(location).

    ``f_decay`` is the caller-declared tail of f; it is combined with the
    tail of W.  ``even`` halves the work for even f.
    """
    decay = f_decay.times(mu.decay)
    if period is not None:
        decay = Decay(decay.kind, decay.rate, period)
    if mu.density is None:
        res = IntegralResult(0.0, 0.0, 0)
    else:
        res = integrate_weighted(
            f,
            mu.W,
            decay,
            tol,
            span=span,
            even=even,
            origin_power=mu.origin_power,
        )
    if mu.atoms:
        loc = np.array([a[0] for a in mu.atoms])
        mass = np.array([a[1] for a in mu.atoms])
        val = float(np.sum(mass * np.real(f(loc))))
        res = IntegralResult(res.value + val, res.error_estimate, res.evaluations + loc.size)
    return res


def lift_factor(d: int) -> float:
    """Half the surface area of the unit sphere in R^d: pi^(d/2)/Gamma(d/2)."""
    d = int(d)
    if d < 1:
        raise ValueError("dimension must be at least 1")
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0)
