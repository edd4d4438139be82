"""Nitrate load adjustments for controlled drainage and restored wetlands.

Both adjustments are expressed as the percent of the unmodified annual load
that still leaves the field (controlled drainage) or the wetland.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# month index -> season index (Jan-Mar, Apr-Jun, Jul-Sep, Oct-Dec)
MONTH_SEASON = np.repeat(np.arange(4), 3)

CD = "CD"
WETLAND_D = "D"
WETLAND_D_STAR = "D*"


class NoDrainageError(ValueError):
    pass


@dataclass(frozen=True)
class MonthlyClimate:
    """Monthly drainflow (m/day) and air temperature (deg C), January first."""

    drainflow: tuple
    air_temp: tuple

    def __post_init__(self):
        q = np.asarray(self.drainflow, dtype=float)
        t = np.asarray(self.air_temp, dtype=float)
        if q.shape != (12,) or t.shape != (12,):
            raise ValueError("monthly climate needs 12 drainflow and 12 temperature values")
        if np.any(q < 0):
            raise ValueError("drainflow must be >= 0")
        object.__setattr__(self, "drainflow", tuple(float(v) for v in q))
        object.__setattr__(self, "air_temp", tuple(float(v) for v in t))


@dataclass(frozen=True)
class CdrTable:
    """Seasonal controlled-drainage flow ratios, percent of free drainage."""

    ratios: tuple = (36.4, 57.2, 54.8, 81.7)

    def __post_init__(self):
        r = tuple(float(v) for v in self.ratios)
        if len(r) != 4 or not all(0 < v <= 100 for v in r):
            raise ValueError(f"CDR table needs 4 values in (0, 100], got {self.ratios}")
        object.__setattr__(self, "ratios", r)

    def monthly(self) -> np.ndarray:
        return np.asarray(self.ratios)[MONTH_SEASON]


@dataclass(frozen=True)
class WetlandParams:
    n_tanks: int = 1
    theta: float = 1.09
    k_den: float = 0.15  # m/day
    f_w: float = 0.005  # wetland area / contributing cropland area

    def __post_init__(self):
        if int(self.n_tanks) != self.n_tanks or self.n_tanks < 1:
            raise ValueError(f"n_tanks must be a positive integer, got {self.n_tanks}")
        if not 1.0 <= self.theta <= 1.09:
            raise ValueError(f"theta must lie in [1.0, 1.09], got {self.theta}")
        if not 0.09 <= self.k_den <= 0.15:
            raise ValueError(f"k_den must lie in [0.09, 0.15] m/day, got {self.k_den}")
        if not 0 < self.f_w < 1:
            raise ValueError(f"f_w must lie in (0, 1), got {self.f_w}")


def _drainflow(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 12:
        raise ValueError("drainflow needs 12 monthly values")
    if np.any(np.sum(q, axis=-1) <= 0):
        raise NoDrainageError("no drainage: monthly drainflow sums to zero")
    return q


def cd_adjustment_array(drainflow, cdr: CdrTable = CdrTable()):
    """Drainflow-weighted CDR; ``drainflow`` has shape (..., 12).

    Months share a season's ratio, so weights are formed per season first:
    a single wet season then gets weight exactly 1.
    """
    q = _drainflow(drainflow)
    seasonal = q.reshape(q.shape[:-1] + (4, 3)).sum(axis=-1)
    weights = seasonal / seasonal.sum(axis=-1, keepdims=True)
    return np.sum(weights * np.asarray(cdr.ratios), axis=-1)


def cd_load_adjustment(climate: MonthlyClimate, cdr: CdrTable = CdrTable()) -> float:
    """Controlled-drainage load as a percent of the free-drainage load."""
    return float(cd_adjustment_array(climate.drainflow, cdr))


def wetland_rate_constant(t_air, params: WetlandParams = WetlandParams()):
    """Areal removal rate ``k_den * theta**(T - 20)`` with water temperature ``max(T, 0)``."""
    t_water = np.maximum(np.asarray(t_air, dtype=float), 0.0)
    k = params.k_den * np.power(params.theta, t_water - 20.0)
    return float(k) if k.ndim == 0 else k


def hydraulic_loading_rate(q, f_w: float):
    """Inflow per wetland area per day given cropland drainflow ``q`` (m/day)."""
    return (1.0 - f_w) / f_w * np.asarray(q, dtype=float)


def tanks_in_series_fraction(k, hlr, n_tanks: int = 1):
    """Outflow/inflow concentration ratio ``(1 + K / (N hlr))**-N``."""
    return np.power(1.0 + np.asarray(k) / (n_tanks * np.asarray(hlr, dtype=float)), -n_tanks)


def wetland_adjustment_array(drainflow, air_temp, params: WetlandParams = WetlandParams()):
    """Array form of :func:`wetland_load_adjustment` over shape (..., 12) inputs."""
    q = _drainflow(drainflow)
    k = wetland_rate_constant(air_temp, params)
    wet = q > 0
    hlr = hydraulic_loading_rate(np.where(wet, q, 1.0), params.f_w)
    frac = np.where(wet, tanks_in_series_fraction(k, hlr, params.n_tanks), 0.0)
    return 100.0 * np.sum(q * frac, axis=-1) / np.sum(q, axis=-1)


def wetland_load_adjustment(climate: MonthlyClimate, params: WetlandParams = WetlandParams()) -> float:
    """Wetland effluent load as a percent of the influent load.

    Inflow concentration is taken as constant across months, so monthly loads
    are weighted by drainflow; dry months carry no weight.
    """
    return float(wetland_adjustment_array(climate.drainflow, climate.air_temp, params))


def treated_fraction(cell, policy: str, adoption: float) -> float:
    """Share of a cell's cropland treated under ``policy``."""
    if policy == CD:
        s = cell.cd_suitable_fraction
    elif policy == WETLAND_D:
        s = min(cell.wetland_suitable_fraction, cell.tile_drained_fraction)
    elif policy == WETLAND_D_STAR:
        s = cell.wetland_suitable_fraction
    else:
        raise ValueError(f"unknown BMP policy {policy!r}")
    return s * adoption


def effective_cell_load_multiplier(cell, policy: str, adoption: float, adjustment: float | None = None,
                                   cdr: CdrTable = CdrTable(), wetland: WetlandParams = WetlandParams()) -> float:
    """Multiplier on a cell's leached mass once a BMP covers part of it.

    ``adjustment`` is the percent load adjustment on treated land; when omitted
    it is computed from ``cell.climate``.
    """
    if not 0 <= adoption <= 1:
        raise ValueError(f"adoption must lie in [0, 1], got {adoption}")
    share = treated_fraction(cell, policy, adoption)
    if share == 0:
        return 1.0
    if adjustment is None:
        if cell.climate is None:
            raise ValueError(f"cell {cell.cell_id} has no monthly climate")
        if policy == CD:
            adjustment = cd_load_adjustment(cell.climate, cdr)
        else:
            adjustment = wetland_load_adjustment(cell.climate, wetland)
    return share * adjustment / 100.0 + (1.0 - share)


@dataclass(frozen=True)
class BmpSettings:
    """Hydrology parameters shared by every BMP scenario."""

    cdr: CdrTable = field(default_factory=CdrTable)
    wetland: WetlandParams = field(default_factory=WetlandParams)
