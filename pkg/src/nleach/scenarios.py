"""Policy scenarios and their translation into per-cell shocks.

Policies: A leaching tax, B N-use efficiency gain, C controlled drainage,
D / D* wetland restoration (D restricted to tile-drained land). Scenarios
compose with :func:`combine`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .bmp import CD, WETLAND_D, WETLAND_D_STAR, BmpSettings, cd_adjustment_array, wetland_adjustment_array
from .leaching import LeachingTax, mean_cost_wedge

logger = logging.getLogger(__name__)

DEFAULT_FARMER_SHARE = 0.5
DEFAULT_CD_COST = 4.0  # currency per treated ha per year
DEFAULT_WETLAND_COST = 6.0  # currency per treated ha per year
LAND_TAKE_RATIO = 0.0225  # (0.5 wetland + 1.75 buffer) acres per 100 treated acres


class ScenarioError(ValueError):
    pass


class TaxCalibrationError(ScenarioError):
    pass


def _fraction(name, v):
    if not 0 <= v <= 1:
        raise ScenarioError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class CdPolicy:
    adoption: float = 1.0
    farmer_share: float = DEFAULT_FARMER_SHARE
    cost_per_ha: float = DEFAULT_CD_COST

    def __post_init__(self):
        _fraction("cd adoption", self.adoption)
        _fraction("cd farmer_share", self.farmer_share)
        if self.cost_per_ha < 0:
            raise ScenarioError("cd cost_per_ha must be >= 0")


@dataclass(frozen=True)
class WetlandPolicy:
    variant: str = WETLAND_D
    adoption: float = 1.0
    farmer_share: float = DEFAULT_FARMER_SHARE
    cost_per_ha: float = DEFAULT_WETLAND_COST
    land_take_ratio: float = LAND_TAKE_RATIO

    def __post_init__(self):
        if self.variant not in (WETLAND_D, WETLAND_D_STAR):
            raise ScenarioError(f"wetland variant must be 'D' or 'D*', got {self.variant!r}")
        _fraction("wetland adoption", self.adoption)
        _fraction("wetland farmer_share", self.farmer_share)
        _fraction("wetland land_take_ratio", self.land_take_ratio)
        if self.cost_per_ha < 0:
            raise ScenarioError("wetland cost_per_ha must be >= 0")


@dataclass(frozen=True)
class PolicyScenario:
    """Declarative bundle of shocks. The default instance is the null scenario."""

    label: str = "null"
    tax: LeachingTax | None = None
    target_cost_increase: float | None = None  # percent; informational once the rate is solved
    efficiency_gain: float = 0.0
    cd: CdPolicy | None = None
    wetland: WetlandPolicy | None = None
    productivity_shift: float = 0.0  # Hicks-neutral; output multiplier is 1 + shift

    def __post_init__(self):
        if self.efficiency_gain < 0:
            raise ScenarioError("efficiency_gain must be >= 0")
        if not self.productivity_shift > -1:
            raise ScenarioError("productivity_shift must be > -1")

    @property
    def tax_rate(self) -> float:
        return self.tax.rate if self.tax is not None else 0.0

    @property
    def components(self) -> tuple:
        out = []
        if self.tax_rate > 0:
            out.append("A")
        if self.efficiency_gain > 0:
            out.append("B")
        if self.cd is not None and self.cd.adoption > 0:
            out.append("C")
        if self.wetland is not None and self.wetland.adoption > 0:
            out.append(self.wetland.variant)
        return tuple(out)

    @property
    def is_null(self) -> bool:
        return not self.components and self.productivity_shift == 0

    def relabel(self, label: str) -> "PolicyScenario":
        return replace(self, label=label)


NULL = PolicyScenario()


def _cost_weights(cal, weighting: str):
    u = cal.units
    n_use = u["area"] * u["n_rate"] / 1000.0
    if weighting == "n_use":
        return n_use
    if weighting == "leaching":
        return n_use * u["theta"]
    if weighting == "cells":
        return np.ones_like(n_use)
    raise ScenarioError(f"unknown cost weighting {weighting!r}")


def baseline_cost_wedge(cal, tax_rate: float, weighting: str = "n_use") -> float:
    """Average increase of the effective N price over the national price, percent."""
    return 100.0 * mean_cost_wedge(cal.units["theta"], _cost_weights(cal, weighting), tax_rate,
                                   cal.params.national_n_price)


def calibrate_tax(cal, target_cost_increase: float, weighting: str = "n_use") -> float:
    """Leaching tax rate whose baseline-average cost wedge equals the target percent."""
    if target_cost_increase < 0:
        raise TaxCalibrationError("target cost increase must be >= 0")
    if target_cost_increase == 0:
        return 0.0

    def gap(t):
        return baseline_cost_wedge(cal, t, weighting) - target_cost_increase

    hi = cal.params.national_n_price
    for _ in range(60):
        if gap(hi) > 0:
            break
        hi *= 2.0
    else:
        raise TaxCalibrationError("could not bracket the tax rate (all leaching intensities zero?)")
    return brentq(gap, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)


def scenario_A(cal, target_cost_increase: float = 28.9, weighting: str = "n_use", label: str = "A"):
    """Leaching tax sized so the average N cost rises by ``target_cost_increase`` percent."""
    if not target_cost_increase >= 0:
        raise ScenarioError("target cost increase must be >= 0")
    rate = calibrate_tax(cal, target_cost_increase, weighting)
    return PolicyScenario(label=label, tax=LeachingTax(rate), target_cost_increase=target_cost_increase)


def scenario_tax(rate: float, label: str = "A") -> PolicyScenario:
    return PolicyScenario(label=label, tax=LeachingTax(rate))


def scenario_B(gain: float = 0.10, label: str = "B") -> PolicyScenario:
    return PolicyScenario(label=label, efficiency_gain=gain)


def scenario_C(adoption: float = 1.0, farmer_share: float = DEFAULT_FARMER_SHARE,
               cost_per_ha: float = DEFAULT_CD_COST, label: str = "C") -> PolicyScenario:
    return PolicyScenario(label=label, cd=CdPolicy(adoption, farmer_share, cost_per_ha))


def scenario_D(variant: str = WETLAND_D, adoption: float = 1.0, farmer_share: float = DEFAULT_FARMER_SHARE,
               cost_per_ha: float = DEFAULT_WETLAND_COST, label: str | None = None) -> PolicyScenario:
    return PolicyScenario(label=label or variant,
                          wetland=WetlandPolicy(variant, adoption, farmer_share, cost_per_ha))


def combine(scenarios, label: str | None = None) -> PolicyScenario:
    """Merge scenarios; each kind of shock may come from at most one of them."""
    scenarios = list(scenarios)
    if not scenarios:
        return NULL
    real = [s for s in scenarios if not s.is_null]
    if len(real) == 1 and label is None:
        return real[0]

    def pick(attr, present):
        holders = [s for s in scenarios if present(s)]
        if len(holders) > 1:
            raise ScenarioError(f"incompatible combination: more than one scenario sets {attr}")
        return holders[0] if holders else None

    tax = pick("a leaching tax", lambda s: s.tax_rate > 0)
    eff = pick("an efficiency gain", lambda s: s.efficiency_gain > 0)
    cd = pick("controlled drainage", lambda s: s.cd is not None)
    wet = pick("a wetland variant", lambda s: s.wetland is not None)
    tfp = pick("a productivity shift", lambda s: s.productivity_shift != 0)
    name = label or "+".join(s.label for s in real) or "null"
    return PolicyScenario(
        label=name,
        tax=tax.tax if tax else None,
        target_cost_increase=tax.target_cost_increase if tax else None,
        efficiency_gain=eff.efficiency_gain if eff else 0.0,
        cd=cd.cd if cd else None,
        wetland=wet.wetland if wet else None,
        productivity_shift=tfp.productivity_shift if tfp else 0.0,
    )


# --------------------------------------------------------------------------- shocks

@dataclass(frozen=True, eq=False)
class CellShocks:
    """Scenario shocks resolved onto cells (length n_cells) and units (length n_units)."""

    wetland_share: np.ndarray
    cd_share: np.ndarray
    wetland_adjustment: np.ndarray  # percent of load leaving treated land
    cd_adjustment: np.ndarray
    leach_multiplier: np.ndarray
    land_cost_per_ha: np.ndarray  # farmer-paid BMP cost, real currency per cropland ha
    endowment_factor: np.ndarray  # land supply shift from wetland land take
    n_price_wedge: np.ndarray  # per unit, real currency per ton N
    efficiency_shifter: float = 1.0
    productivity: float = 1.0
    extra: dict = field(default_factory=dict)


def policy_shocks(cal, scenario: PolicyScenario, bmp: BmpSettings = BmpSettings()) -> CellShocks:
    cf = cal.baseline.cell_frame
    n = len(cf)
    tile = cf.tile_drained_fraction.to_numpy(float)
    cd_suit = cf.cd_suitable_fraction.to_numpy(float)
    wet_suit = cf.wetland_suitable_fraction.to_numpy(float)

    wet_share = np.zeros(n)
    if scenario.wetland is not None:
        s = wet_suit if scenario.wetland.variant == WETLAND_D_STAR else np.minimum(wet_suit, tile)
        wet_share = s * scenario.wetland.adoption
    cd_share = np.zeros(n)
    if scenario.cd is not None:
        # wetland-first: assume CD-suitable land overlaps wetland-treated land as far as possible
        cd_share = np.maximum(cd_suit * scenario.cd.adoption - wet_share, 0.0)

    wet_adj = np.full(n, 100.0)
    cd_adj = np.full(n, 100.0)
    if np.any(wet_share > 0) or np.any(cd_share > 0):
        drain, temp = cal.baseline.climate_arrays()
        m = wet_share > 0
        if m.any():
            wet_adj[m] = wetland_adjustment_array(drain[m], temp[m], bmp.wetland)
        m = cd_share > 0
        if m.any():
            cd_adj[m] = cd_adjustment_array(drain[m], bmp.cdr)
    multiplier = 1.0 - wet_share * (1 - wet_adj / 100.0) - cd_share * (1 - cd_adj / 100.0)

    cost = np.zeros(n)
    endowment = np.ones(n)
    if scenario.cd is not None:
        cost += scenario.cd.farmer_share * scenario.cd.cost_per_ha * cd_share
    if scenario.wetland is not None:
        cost += scenario.wetland.farmer_share * scenario.wetland.cost_per_ha * wet_share
        endowment -= scenario.wetland.land_take_ratio * wet_share

    wedge = cal.units["theta"] * scenario.tax_rate
    return CellShocks(
        wetland_share=wet_share, cd_share=cd_share, wetland_adjustment=wet_adj, cd_adjustment=cd_adj,
        leach_multiplier=multiplier, land_cost_per_ha=cost, endowment_factor=endowment,
        n_price_wedge=wedge, efficiency_shifter=1.0 + scenario.efficiency_gain,
        productivity=1.0 + scenario.productivity_shift,
    )


__all__ = [
    "PolicyScenario", "CdPolicy", "WetlandPolicy", "CellShocks", "NULL", "ScenarioError",
    "TaxCalibrationError", "scenario_A", "scenario_B", "scenario_C", "scenario_D", "scenario_tax",
    "combine", "calibrate_tax", "baseline_cost_wedge", "policy_shocks", "CD", "WETLAND_D", "WETLAND_D_STAR",
]
