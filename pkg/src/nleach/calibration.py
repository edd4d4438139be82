"""Nested CES technologies calibrated to the baseline.

Every nest is written in calibrated share form: prices and quantities are
expressed relative to their baseline values, so a nest's price index is 1 at
baseline and its shares are the baseline cost shares. Parameters may be
scalars (one cell) or arrays (many cells at once); all operations broadcast.

Nesting, bottom to top::

    rainfed:    (land, nonland) -> augmented_land;  (augmented_land, n) -> output
    irrigated:  (land, water) -> land_water;  (land_water, nonland) -> augmented_land;
                (augmented_land, n) -> output
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .grid_data import IRRIGATED, PRACTICES, RAINFED, BaselineEconomy, GridCell, MarketParams
from .transfer import TransferFunction, sigma_land_n_array

logger = logging.getLogger(__name__)

CD_TOLERANCE = 1e-10  # |1 - sigma| below this uses the Cobb-Douglas limit


class CalibrationError(ValueError):
    pass


def _cobb_douglas(sigma):
    return np.abs(1.0 - np.asarray(sigma, dtype=float)) < CD_TOLERANCE


def ces_price_index(shares, prices, sigma):
    """``(sum s_i p_i**(1-sigma))**(1/(1-sigma))`` with the log-linear limit at sigma = 1."""
    sigma = np.asarray(sigma, dtype=float)
    cd = _cobb_douglas(sigma)
    r = np.where(cd, 1.0, 1.0 - sigma)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        power = sum(s * np.power(p, r) for s, p in zip(shares, prices)) ** (1.0 / r)
        geometric = np.exp(sum(s * np.log(p) for s, p in zip(shares, prices)))
    return np.where(cd, geometric, power)


def ces_quantity_index(shares, quantities, sigma):
    """Primal CES aggregate of relative quantities (Leontief is not supported)."""
    sigma = np.asarray(sigma, dtype=float)
    cd = _cobb_douglas(sigma)
    rho = np.where(cd, 1.0, (sigma - 1.0) / sigma)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        power = sum(s * np.power(q, rho) for s, q in zip(shares, quantities)) ** (1.0 / rho)
        geometric = np.exp(sum(s * np.log(q) for s, q in zip(shares, quantities)))
    return np.where(cd, geometric, power)


def ces_partial(shares, quantities, sigma, i):
    """d(aggregate)/d(quantity_i) for the relative-quantity CES."""
    sigma = np.asarray(sigma, dtype=float)
    q = ces_quantity_index(shares, quantities, sigma)
    cd = _cobb_douglas(sigma)
    rho = np.where(cd, 1.0, (sigma - 1.0) / sigma)
    with np.errstate(divide="ignore", invalid="ignore"):
        power = shares[i] * np.power(quantities[i] / q, rho - 1.0)
        geometric = shares[i] * q / quantities[i]
    return np.where(cd, geometric, power)


def ces_solve_price(total, known_share, known_price, other_share, sigma):
    """Price of one child that makes the nest's price index equal ``total``.

    NaN where no positive price does (the other child alone is too dear).
    """
    sigma = np.asarray(sigma, dtype=float)
    cd = _cobb_douglas(sigma)
    r = np.where(cd, 1.0, 1.0 - sigma)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        base = (np.power(total, r) - known_share * np.power(known_price, r)) / other_share
        power = np.where(base > 0, np.power(np.where(base > 0, base, 1.0), 1.0 / r), np.nan)
        geometric = np.exp((np.log(total) - known_share * np.log(known_price)) / other_share)
    return np.where(cd, geometric, power)


@dataclass(frozen=True)
class CesNest:
    """A two-child CES nest; children are input names or further nests."""

    name: str
    children: tuple
    shares: tuple
    sigma: object

    def child_names(self):
        return tuple(c if isinstance(c, str) else c.name for c in self.children)

    def price_index(self, rel_prices: dict):
        child = [rel_prices[c] if isinstance(c, str) else c.price_index(rel_prices) for c in self.children]
        return ces_price_index(self.shares, child, self.sigma)

    def quantity_index(self, rel_quantities: dict):
        child = [rel_quantities[c] if isinstance(c, str) else c.quantity_index(rel_quantities)
                 for c in self.children]
        return ces_quantity_index(self.shares, child, self.sigma)

    def demands(self, rel_prices: dict, rel_quantity, out: dict, own_price=None):
        """Push a relative nest quantity down to leaf inputs (cost-minimising)."""
        own = self.price_index(rel_prices) if own_price is None else own_price
        for child in self.children:
            if isinstance(child, str):
                out[child] = rel_quantity * np.power(rel_prices[child] / own, -self.sigma)
            else:
                p = child.price_index(rel_prices)
                child.demands(rel_prices, rel_quantity * np.power(p / own, -self.sigma), out, p)
        return out

    def gradient(self, rel_quantities: dict, scale, out: dict):
        """Accumulate d(top index)/d(leaf) given d(top)/d(this nest) = ``scale``."""
        child = [rel_quantities[c] if isinstance(c, str) else c.quantity_index(rel_quantities)
                 for c in self.children]
        for i, c in enumerate(self.children):
            d = scale * ces_partial(self.shares, child, self.sigma, i)
            if isinstance(c, str):
                out[c] = d
            else:
                c.gradient(rel_quantities, d, out)
        return out

    def walk(self):
        yield self
        for c in self.children:
            if not isinstance(c, str):
                yield from c.walk()


@dataclass(frozen=True)
class PracticeTechnology:
    """One practice's nest tree and its baseline quantities and prices.

    Quantities: output and n in tons, land in hectares, water and nonland in
    value units (price 1 at baseline). Parameters may be arrays.
    """

    practice: str
    tree: CesNest
    base_quantity: dict
    base_price: dict
    sigma_fell_back: object = False

    @property
    def inputs(self):
        return tuple(k for k in self.base_quantity if k != "output")

    def _relative_prices(self, prices: dict):
        return {k: np.asarray(prices[k], dtype=float) / self.base_price[k] for k in self.inputs}

    def unit_cost(self, prices: dict):
        """Nominal cost of one ton of output at the given input prices."""
        return self.tree.price_index(self._relative_prices(prices)) * self.base_price["output"]

    def input_demands(self, prices: dict, output):
        """Cost-minimising input quantities for ``output`` tons."""
        rel = self._relative_prices(prices)
        q = np.asarray(output, dtype=float) / self.base_quantity["output"]
        out = self.tree.demands(rel, q, {})
        return {k: out[k] * self.base_quantity[k] for k in self.inputs}

    def output(self, quantities: dict):
        rel = {k: np.asarray(quantities[k], dtype=float) / self.base_quantity[k] for k in self.inputs}
        return self.tree.quantity_index(rel) * self.base_quantity["output"]

    def marginal_products(self, quantities: dict):
        """Tons of output per unit of each input."""
        rel = {k: np.asarray(quantities[k], dtype=float) / self.base_quantity[k] for k in self.inputs}
        grad = self.tree.gradient(rel, 1.0, {})
        return {k: grad[k] * self.base_quantity["output"] / self.base_quantity[k] for k in self.inputs}

    def nest(self, name: str) -> CesNest:
        for n in self.tree.walk():
            if n.name == name:
                return n
        raise KeyError(name)


@dataclass(frozen=True)
class CellTechnology:
    cell_id: int
    practices: dict


def build_tree(practice: str, n_share, sigma_top, params: MarketParams) -> CesNest:
    if practice == RAINFED:
        aug = CesNest("augmented_land", ("land", "nonland"),
                      (params.land_value_share, 1 - params.land_value_share), params.sigma_composite_nonland)
    else:
        lw = CesNest("land_water", ("land", "water"),
                     (1 - params.water_value_share, params.water_value_share), params.sigma_land_water)
        aug = CesNest("augmented_land", (lw, "nonland"),
                      (params.land_water_share, 1 - params.land_water_share), params.sigma_composite_nonland)
    return CesNest("output", (aug, "n"), (1 - n_share, n_share), sigma_top)


def _practice_technology(practice, area, n_rate, yld, sigma_top, fell_back, params: MarketParams):
    area, n_rate, yld = (np.asarray(v, dtype=float) for v in (area, n_rate, yld))
    if np.any(area <= 0) or np.any(n_rate <= 0) or np.any(yld <= 0):
        raise CalibrationError("zero baseline quantity for a required input (area, N rate or yield)")
    output = area * yld / 1000.0
    n_tons = area * n_rate / 1000.0
    revenue = params.crop_price * output
    n_cost = params.national_n_price * n_tons
    if np.any(n_cost >= revenue):
        raise CalibrationError("baseline N expenditure exceeds crop revenue")
    augmented = revenue - n_cost
    if practice == RAINFED:
        land_value = params.land_value_share * augmented
        nonland = augmented - land_value
        qty = {"output": output, "land": area, "nonland": nonland, "n": n_tons}
        price = {"output": params.crop_price, "land": land_value / area, "nonland": 1.0,
                 "n": params.national_n_price}
    else:
        lw_value = params.land_water_share * augmented
        water = params.water_value_share * lw_value
        land_value = lw_value - water
        qty = {"output": output, "land": area, "water": water, "nonland": augmented - lw_value, "n": n_tons}
        price = {"output": params.crop_price, "land": land_value / area, "water": 1.0, "nonland": 1.0,
                 "n": params.national_n_price}
    tree = build_tree(practice, n_cost / revenue, sigma_top, params)
    return PracticeTechnology(practice, tree, qty, price, fell_back)


def _top_sigma(a, b, c, n_rate, params: MarketParams):
    sigma = sigma_land_n_array(a, b, c, n_rate)
    bad = ~(np.isfinite(sigma) & (sigma > 0))
    if np.any(bad):
        logger.warning("land/N elasticity fell back to %.3g for %d unit(s)", params.sigma_fallback,
                       int(np.count_nonzero(bad)))
    return np.where(bad, params.sigma_fallback, sigma), bad


def calibrate_cell(cell: GridCell, transfers: dict, params: MarketParams = MarketParams()) -> CellTechnology:
    """Calibrate the nest trees of every practice a cell grows."""
    practices = {}
    for practice in PRACTICES:
        area = getattr(cell, f"crop_area_{practice}")
        if area == 0:
            continue
        n_rate = getattr(cell, f"n_rate_{practice}")
        tf: TransferFunction = transfers[practice]
        sigma, bad = _top_sigma(tf.a, tf.b, tf.c, n_rate, params)
        practices[practice] = _practice_technology(
            practice, area, n_rate, getattr(cell, f"yield_{practice}"), float(sigma), bool(bad), params)
    if not practices:
        raise CalibrationError(f"cell {cell.cell_id} has no cropland")
    return CellTechnology(cell.cell_id, practices)


def cost_shares(tech) -> dict:
    """Baseline cost shares per nest: ``{nest: {child: share}}``.

    Accepts a :class:`PracticeTechnology` or a :class:`CellTechnology`
    (then keyed by practice first).
    """
    if isinstance(tech, CellTechnology):
        return {p: cost_shares(t) for p, t in tech.practices.items()}
    return {n.name: dict(zip(n.child_names(), n.shares)) for n in tech.tree.walk()}


@dataclass(frozen=True, eq=False)
class CalibratedEconomy:
    """Vectorised calibration of every (cell, practice) unit with cropland.

    ``units`` lists the units in table order; ``groups`` maps a practice to
    the positions (into ``units``) it covers and its array technology.
    """

    baseline: BaselineEconomy
    units: dict
    groups: dict
    sigma_fallback_count: int

    @property
    def params(self) -> MarketParams:
        return self.baseline.params

    @property
    def n_units(self) -> int:
        return len(self.units["cell_index"])

    def technology(self, unit: int) -> PracticeTechnology:
        """Scalar technology of one unit, sliced from its group arrays."""
        practice = self.units["practice"][unit]
        pos, tech = self.groups[practice]
        j = int(np.searchsorted(pos, unit))

        def pick(v):
            return v[j] if np.ndim(v) else v

        def slice_nest(n: CesNest):
            kids = tuple(c if isinstance(c, str) else slice_nest(c) for c in n.children)
            return CesNest(n.name, kids, tuple(pick(s) for s in n.shares), pick(n.sigma))

        return PracticeTechnology(practice, slice_nest(tech.tree),
                                  {k: pick(v) for k, v in tech.base_quantity.items()},
                                  {k: pick(v) for k, v in tech.base_price.items()},
                                  pick(tech.sigma_fell_back))


def calibrate(economy: BaselineEconomy) -> CalibratedEconomy:
    """Calibrate all units; the baseline becomes an exact equilibrium."""
    params = economy.params
    t = economy.table
    active = (t.crop_area > 0).to_numpy()
    if not active.any():
        raise CalibrationError("baseline has no cropland")
    rows = t[active].reset_index(drop=True)
    cell_pos = {cid: i for i, cid in enumerate(economy.cell_ids)}
    regions = sorted(economy.cell_frame.region_code.unique())
    n_rate = rows.n_rate.to_numpy(float)
    alpha, beta = rows.alpha.to_numpy(float), rows.beta.to_numpy(float)
    units = {
        "cell_index": rows.cell_id.map(cell_pos).to_numpy(np.int64),
        "cell_id": rows.cell_id.to_numpy(np.int64),
        "practice": rows.practice.to_numpy(),
        "region_index": rows.region_code.map({r: i for i, r in enumerate(regions)}).to_numpy(np.int64),
        "area": rows.crop_area.to_numpy(float),
        "n_rate": n_rate,
        "alpha": alpha,
        "beta": beta,
        "n_max": rows.n_max.to_numpy(float),
        "theta": alpha + beta * n_rate,
        "regions": regions,
    }
    groups = {}
    fallbacks = 0
    for practice in PRACTICES:
        mask = rows.practice.to_numpy() == practice
        if not mask.any():
            continue
        g = rows[mask]
        sigma, bad = _top_sigma(g.a.to_numpy(), g.b.to_numpy(), g.c.to_numpy(), g.n_rate.to_numpy(), params)
        fallbacks += int(np.count_nonzero(bad))
        tech = _practice_technology(practice, g.crop_area, g.n_rate, g.baseline_yield, sigma, bad, params)
        groups[practice] = (np.flatnonzero(mask), tech)
    return CalibratedEconomy(economy, units, groups, fallbacks)


__all__ = [
    "CalibrationError", "CesNest", "PracticeTechnology", "CellTechnology", "CalibratedEconomy",
    "calibrate", "calibrate_cell", "cost_shares", "ces_price_index", "ces_quantity_index",
    "ces_solve_price", "IRRIGATED", "RAINFED",
]
