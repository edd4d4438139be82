"""Gompertz yield transfer functions.

A transfer function maps an N application rate (kg N/ha) to a corn-equivalent
yield (kg/ha) through ``f(n) = a * exp(-b * c**n)``. Besides the curve and its
first two derivatives this module derives the land/N elasticity of
substitution of the two-input form ``F(L, N) = L * f(N / L)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CURVATURE_FLOOR = 1e-12


class DegenerateCurvatureError(ValueError):
    """Raised when the land/N elasticity cannot be formed at a rate."""


@dataclass(frozen=True)
class TransferFunction:
    """Gompertz coefficients for one cell and practice.

    ``a`` is the yield asymptote in kg/ha, ``b > 0`` and ``0 < c < 1``.
    ``c == 1`` is accepted as the flat limiting case.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"transfer function asymptote a must be > 0, got {self.a}")
        if not self.b > 0:
            raise ValueError(f"transfer function b must be > 0, got {self.b}")
        if not 0 < self.c <= 1:
            raise ValueError(f"transfer function c must lie in (0, 1], got {self.c}")


def _check_rate(n):
    if np.any(np.asarray(n) < 0):
        raise ValueError(f"N application rate must be >= 0, got {n}")


def yield_at(tf: TransferFunction, n):
    """Yield in kg/ha at application rate ``n`` kg N/ha."""
    _check_rate(n)
    return tf.a * np.exp(-tf.b * np.power(tf.c, n))


def yield_derivatives(tf: TransferFunction, n):
    """Return ``(f, f', f'')`` at rate ``n``.

    With ``u = b * c**n`` and ``l = ln c``::

        f'  = f * (-u) * l
        f'' = f * (-u) * l**2 * (1 - u)
    """
    _check_rate(n)
    u = tf.b * np.power(tf.c, n)
    log_c = math.log(tf.c)
    f = tf.a * np.exp(-u)
    d1 = f * (-u) * log_c
    d2 = f * (-u) * log_c**2 * (1.0 - u)
    return f, d1, d2


def marginal_product(tf: TransferFunction, n):
    """Extra crop output per extra unit of N, in tons per ton.

    Yield is kg/ha and the rate is kg N/ha, so ``f'(n)`` is already a
    mass-per-mass ratio and tons/ton needs no rescaling.
    """
    return yield_derivatives(tf, n)[1]


def value_of_marginal_product(tf: TransferFunction, n, crop_price: float):
    """Revenue from one more ton of N (currency per ton N)."""
    return marginal_product(tf, n) * crop_price


def sigma_land_n(tf: TransferFunction, n: float) -> float:
    """Elasticity of substitution between land and N at rate ``n``.

    Uses ``sigma = f'(f - n f') / (-n f'' f)``, the univariate form of
    ``F_L F_N / (F F_LN)`` for ``F = L f(N/L)``.
    """
    if not n > 0:
        raise DegenerateCurvatureError(f"degenerate curvature: rate must be > 0, got {n}")
    f, d1, d2 = yield_derivatives(tf, n)
    if abs(d2) < CURVATURE_FLOOR:
        raise DegenerateCurvatureError(
            f"degenerate curvature: |f''({n})| = {abs(d2):.3e} below floor {CURVATURE_FLOOR}"
        )
    return float(d1 * (f - n * d1) / (-n * d2 * f))


def sigma_land_n_or_default(tf: TransferFunction, n: float, default: float = 0.5):
    """Return ``(sigma, fell_back)``; falls back when sigma is degenerate or non-positive."""
    try:
        sigma = sigma_land_n(tf, n)
    except DegenerateCurvatureError:
        return default, True
    if not (sigma > 0 and math.isfinite(sigma)):
        return default, True
    return sigma, False


def sigma_land_n_array(a, b, c, n):
    """Vectorised sigma; entries with degenerate curvature come back as NaN."""
    a, b, c, n = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, n)))
    u = b * np.power(c, n)
    log_c = np.log(c)
    f = a * np.exp(-u)
    d1 = -f * u * log_c
    d2 = -f * u * log_c**2 * (1.0 - u)
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma = d1 * (f - n * d1) / (-n * d2 * f)
    bad = (n <= 0) | (np.abs(d2) < CURVATURE_FLOOR)
    return np.where(bad, np.nan, sigma)
