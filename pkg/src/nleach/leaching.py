"""Nitrate leaching response, leaching intensity and the leaching-tax wedge."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LeachingResponse:
    """Quadratic leaching ``L(n) = alpha*n + beta*n**2`` (kg N/ha leached).

    ``n_max`` bounds the operating range the fit is trusted on.
    """

    alpha: float
    beta: float
    n_max: float

    def __post_init__(self):
        if not self.n_max > 0:
            raise ValueError(f"operating range n_max must be > 0, got {self.n_max}")


@dataclass(frozen=True)
class LeachingTax:
    """Nationwide uniform tax per ton of N leached."""

    rate: float = 0.0

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"leaching tax rate must be >= 0, got {self.rate}")


class ClampCounter:
    """Counts how often a leaching value had to be forced into ``[0, n]``."""

    def __init__(self):
        self.count = 0

    def add(self, k: int):
        if k:
            self.count += int(k)
            logger.warning("leaching clamped to [0, n] for %d value(s)", k)


def quadratic_leaching(alpha, beta, n, counter: ClampCounter | None = None):
    """Array form of ``alpha*n + beta*n**2`` clamped to ``[0, n]``."""
    n = np.asarray(n, dtype=float)
    raw = alpha * n + beta * n * n
    clamped = np.clip(raw, 0.0, n)
    if counter is not None:
        counter.add(np.count_nonzero(clamped != raw))
    return clamped


def leaching_rate(lr: LeachingResponse, n: float, counter: ClampCounter | None = None) -> float:
    """N leached (kg/ha) at application rate ``n`` (kg/ha)."""
    if not 0 <= n <= lr.n_max:
        raise ValueError(f"N rate {n} outside operating range [0, {lr.n_max}]")
    return float(quadratic_leaching(lr.alpha, lr.beta, n, counter))


def leaching_intensity(lr: LeachingResponse, n: float) -> float:
    """Share of applied N that is leached, ``L(n) / n``."""
    if n == 0:
        raise ValueError("leaching intensity is undefined at n = 0")
    return leaching_rate(lr, n) / n


def effective_n_price(p_national, theta, tax: LeachingTax):
    """Cell-specific N price: national price plus intensity-scaled tax."""
    theta = np.asarray(theta, dtype=float)
    if np.any((theta < 0) | (theta > 1)):
        raise ValueError("leaching intensity must lie in [0, 1]")
    out = p_national + theta * tax.rate
    return float(out) if out.ndim == 0 else out


def mean_cost_wedge(theta, weights, tax_rate: float, p_national: float) -> float:
    """Weighted mean of ``theta * t / p`` as a fraction of the national price."""
    theta = np.asarray(theta, dtype=float)
    weights = np.asarray(weights, dtype=float)
    return float(np.sum(weights * theta) / np.sum(weights) * tax_rate / p_national)
