"""Exponent algebra, regime classification, and the Riesz constant."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError

SQRT_PI = math.sqrt(math.pi)


class Regime(enum.Enum):
    I_STRICT = "regime1-strict"      # 2s < 1 - beta
    I_BOUNDARY = "regime1-boundary"  # 2s = 1 - beta
    II = "regime2"                   # 2s > 1 - beta


@dataclass(frozen=True)
class FracParams:
    """The triple (s, beta, r) together with its regime tag.

    r is the critical Holder exponent attached to the pair: 2s/(1-beta)
    below the diagonal 2s = 1-beta, 2s+beta above it, and 1 on it (both
    formulas agree there).
    """

    s: float
    beta: float
    r: float
    regime: Regime


@dataclass(frozen=True)
class RieszConstant:
    s: float
    value: float


def gamma_function(x: float) -> float:
    """Gamma(x) for x > 0.  Accurate to a few ulp on (0, 20]."""
    if not x > 0.0:
        raise DomainError(f"gamma_function requires x > 0, got {x}")
    return math.gamma(x)


def riesz_constant(s: float) -> RieszConstant:
    """Normalization constant s * 4^s * Gamma(1/2+s) / (sqrt(pi) * Gamma(1-s))."""
    if not 0.0 < s < 1.0:
        raise DomainError(f"riesz_constant requires 0 < s < 1, got {s}")
    value = s * 4.0**s * gamma_function(0.5 + s) / (SQRT_PI * gamma_function(1.0 - s))
    return RieszConstant(s=s, value=value)


def make_params(s: float, beta: float) -> FracParams:
    """Classify (s, beta) by comparing 2s against 1 - beta and derive r.

    The comparison is an exact floating-point comparison: callers are
    expected to pass the same rationals-as-doubles on both sides, there is
    no epsilon fuzz.
    """
    if not 0.0 < s < 1.0:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    two_s = 2.0 * s
    complement = 1.0 - beta
    if two_s < complement:
        return FracParams(s, beta, two_s / complement, Regime.I_STRICT)
    if two_s == complement:
        return FracParams(s, beta, 1.0, Regime.I_BOUNDARY)
    return FracParams(s, beta, two_s + beta, Regime.II)
