"""Empirical regularity measurement on sampled curves and callables.

The local exponent estimator subtracts a Taylor polynomial (order 0 or 1)
and fits the log-log slope of the remainder over a dyadic ladder of scales.
For order 1 the derivative is obtained by extrapolating central differences
with a measured power-law model; a single-scale difference would leak a
spurious linear term into the remainder for functions of the form
h^(1+theta) + c*h and bias the slope toward 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError
from .fraclap import SampledCurve


@dataclass(frozen=True)
class HolderEstimate:
    exponent: float
    seminorm_at_exponent: float
    fit_window: tuple
    fit_residual: float


@dataclass(frozen=True)
class SmootherThanWindow:
    """Signal: remainders sat below the noise floor at every scale."""

    threshold: float


@dataclass(frozen=True)
class ModulusCurve:
    scales: np.ndarray
    values: np.ndarray


def holder_seminorm(curve: SampledCurve, beta: float) -> float:
    """sup over sample pairs of |f(x_i) - f(x_j)| / |x_i - x_j|^beta."""
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    x = np.asarray(curve.x, dtype=float)
    f = np.asarray(curve.values, dtype=float)
    n = x.size
    if n < 2:
        raise PreconditionError("need at least two samples")
    if n <= 4096:
        best = 0.0
        chunk = 256
        for i0 in range(0, n, chunk):
            xi = x[i0:i0 + chunk, None]
            fi = f[i0:i0 + chunk, None]
            dx = np.abs(xi - x[None, :])
            df = np.abs(fi - f[None, :])
            mask = dx > 0.0
            if mask.any():
                best = max(best, float((df[mask] / dx[mask] ** beta).max()))
        return best
    # larger curves: exact per-lag sweep, O(n) memory
    order = np.argsort(x)
    x = x[order]
    f = f[order]
    best = 0.0
    for lag in range(1, n):
        dx = x[lag:] - x[:-lag]
        df = np.abs(f[lag:] - f[:-lag])
        good = dx > 0.0
        if good.any():
            best = max(best, float((df[good] / dx[good] ** beta).max()))
    return best


def modulus_curve(curve: SampledCurve, n_scales: int = 16) -> ModulusCurve:
    """omega(h) = sup of |f(x)-f(y)| over grid pairs with |x-y| <= h."""
    x = np.asarray(curve.x, dtype=float)
    f = np.asarray(curve.values, dtype=float)
    order = np.argsort(x)
    x, f = x[order], f[order]
    span = x[-1] - x[0]
    scales = span * 2.0 ** (-np.arange(n_scales, dtype=float))
    values = np.zeros(n_scales)
    running = 0.0
    # lags sorted descending in separation contribute to all larger scales
    omega_by_lag = []
    seps = []
    for lag in range(1, x.size):
        dx = x[lag:] - x[:-lag]
        df = np.abs(f[lag:] - f[:-lag])
        omega_by_lag.append(df)
        seps.append(dx)
    dx_all = np.concatenate(seps)
    df_all = np.concatenate(omega_by_lag)
    for i, h in enumerate(scales):
        sel = dx_all <= h
        values[i] = float(df_all[sel].max()) if sel.any() else 0.0
    del running
    return ModulusCurve(scales=scales, values=values)


def lipschitz_quotient_max(curve: SampledCurve) -> float:
    """max over adjacent samples of |delta f| / |delta x|."""
    x = np.asarray(curve.x, dtype=float)
    f = np.asarray(curve.values, dtype=float)
    if x.size < 2:
        raise PreconditionError("need at least two samples")
    dx = np.diff(x)
    if np.any(dx == 0.0):
        raise PreconditionError("duplicate abscissae")
    return float(np.abs(np.diff(f) / dx).max())


# ---------------------------------------------------------------------------
# local exponent at a point
# ---------------------------------------------------------------------------

def _extrapolated_derivative(g, x0, hs):
    """Derivative of g at x0 from central differences D(h) = c + A*h^theta.

    Consecutive difference ratios identify theta; the limit c follows by
    geometric extrapolation.  Falls back to the finest difference when no
    consistent power law is visible.
    """
    D = np.array([(g(x0 + h) - g(x0 - h)) / (2.0 * h) for h in hs])
    e = np.diff(D)
    scale = max(1.0, float(np.abs(D).max()))
    if np.all(np.abs(e) <= 1e-13 * scale):
        return float(D[-1])
    best = float(D[-1])
    for k in range(len(e) - 1, 0, -1):
        if abs(e[k - 1]) <= 1e-13 * scale:
            continue
        q = e[k] / e[k - 1]
        if 1e-4 < q < 0.95:
            best = float(D[k + 1] + e[k] * q / (1.0 - q))
            break
    return best


def local_exponent(g, x0: float, h_min: float, h_max: float, taylor_order: int = 0):
    """Slope of log |g(x0+h) - P(h)| against log h over a dyadic ladder.

    P is the Taylor polynomial of degree taylor_order at x0.  Returns a
    HolderEstimate, or SmootherThanWindow when the remainder is at rounding
    level on every scale.
    """
    if not 0.0 < h_min < h_max:
        raise DomainError("need 0 < h_min < h_max")
    if taylor_order not in (0, 1):
        raise DomainError("taylor_order must be 0 or 1")
    n_scales = int(math.floor(math.log2(h_max / h_min))) + 1
    if n_scales < 12:
        raise DomainError("window must span at least 12 dyadic scales")
    hs = h_max * 2.0 ** (-np.arange(n_scales, dtype=float))
    g0 = g(x0)
    slope0 = 0.0
    if taylor_order == 1:
        slope0 = _extrapolated_derivative(g, x0, hs[: min(7, n_scales)])
    R = np.array([g(x0 + h) - g0 - slope0 * h for h in hs])
    floor = 1e-14 * max(1.0, abs(g0))
    keep = np.abs(R) > floor
    if keep.sum() < 4:
        return SmootherThanWindow(threshold=floor)
    lh = np.log2(hs[keep])
    lr = np.log2(np.abs(R[keep]))
    slope, intercept = np.polyfit(lh, lr, 1)
    resid = float(np.abs(lr - (slope * lh + intercept)).max())
    semi = float(np.max(np.abs(R[keep]) / hs[keep] ** slope))
    return HolderEstimate(
        exponent=float(slope),
        seminorm_at_exponent=semi,
        fit_window=(float(hs[keep].min()), float(hs[keep].max())),
        fit_residual=resid,
    )
