"""Sharp sign-uncertainty constants for band-limited functions via de Branges spaces."""

from __future__ import annotations

from .debranges import (
    HermiteBiehler,
    apply_quadrature,
    flipped_exponential,
    homogeneous,
    kernel,
    paley_wiener,
    quadrature_check,
    quadrature_rule,
    t_alpha_zeros,
    verify_hb,
)
from .extremal import (
    certify,
    counterexample,
    extremizer,
    poly_reduce,
    rayleigh_min,
    sharp_constant,
)
from .kernelbuild import WeightedPWSpace, build_gram, structure_function, validate_c4
from .lifts import EvenEntireSeries, even_part, lift, radial_mu_integral
from .measures import Measure, katz_sarnak, lebesgue, mu_integral, parse_measure, power_weight
from .numerics import Decay, Interval

__version__ = "0.1.0"

__all__ = [
    "Decay",
    "EvenEntireSeries",
    "HermiteBiehler",
    "Interval",
    "Measure",
    "WeightedPWSpace",
    "apply_quadrature",
    "build_gram",
    "certify",
    "counterexample",
    "even_part",
    "extremizer",
    "flipped_exponential",
    "homogeneous",
    "katz_sarnak",
    "kernel",
    "lebesgue",
    "lift",
    "mu_integral",
    "paley_wiener",
    "parse_measure",
    "poly_reduce",
    "power_weight",
    "quadrature_check",
    "quadrature_rule",
    "radial_mu_integral",
    "rayleigh_min",
    "sharp_constant",
    "structure_function",
    "t_alpha_zeros",
    "validate_c4",
    "verify_hb",
]
