"""Multi-market partial equilibrium after a policy shock.

The unknowns handed to Newton are a few macro prices: the world crop price,
the national N price and one nonland factor price per region. Given those,
every (cell, practice) unit responds analytically: zero profit pins down the
cost of land, local land (and water) market clearing pins down the rent, and
CES demands follow. Land and water markets are therefore cleared inside the
residual evaluation.

All computations run on real prices, i.e. nominal prices divided by the
numeraire, so rescaling the numeraire leaves quantities untouched.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from .bmp import BmpSettings
from .calibration import CalibratedEconomy, ces_solve_price
from .grid_data import IRRIGATED
from .leaching import ClampCounter, quadratic_leaching
from .scenarios import NULL, CellShocks, PolicyScenario, policy_shocks

logger = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    """Newton failed; ``diagnostics`` describes the last iterate."""

    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class ClosureError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 200
    max_halvings: int = 40
    max_log_step: float = 1.0  # damping: cap on any log-price change per iteration
    fd_step: float = 1e-6
    threads: int = 1
    numeraire: float = 1.0
    bisection_iters: int = 64

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1 or self.threads < 1:
            raise ValueError("max_iter and threads must be >= 1")
        if not self.numeraire > 0:
            raise ValueError("numeraire must be > 0")
        if not self.max_log_step > 0:
            raise ValueError("max_log_step must be > 0")


@dataclass(frozen=True, eq=False)
class MarketSystem:
    """Nominal prices. Land and water rents are per unit (cell x practice)."""

    crop_price: float
    n_price: float
    nonland_price: np.ndarray  # one per region
    numeraire: float = 1.0
    land_rent: np.ndarray | None = None
    water_rent: np.ndarray | None = None  # NaN for rainfed units

    def real(self):
        return (self.crop_price / self.numeraire, self.n_price / self.numeraire,
                np.asarray(self.nonland_price, dtype=float) / self.numeraire)


@dataclass(frozen=True, eq=False)
class EquilibriumSolution:
    label: str
    prices: MarketSystem
    units: pd.DataFrame
    cells: pd.DataFrame
    totals: dict
    residuals: dict
    diagnostics: dict
    scenario: PolicyScenario = field(default=NULL)

    @property
    def converged(self) -> bool:
        return self.diagnostics["converged"]

    @property
    def max_residual(self) -> float:
        return self.diagnostics["max_residual"]


# --------------------------------------------------------------------------- unit arrays

def _unit_arrays(cal: CalibratedEconomy) -> dict:
    """Flatten the grouped technologies into arrays aligned with ``cal.units``."""
    n = cal.n_units
    out = {k: np.full(n, np.nan) for k in (
        "s_aug", "s_n", "sigma", "s_low", "s_x", "sigma_aug", "s_land", "s_water", "sigma_lw",
        "y0", "n0", "l0", "x0", "w0", "rent0")}
    irrigated = np.zeros(n, dtype=bool)
    for practice, (pos, tech) in cal.groups.items():
        top = tech.tree
        aug = top.children[0]
        out["s_aug"][pos], out["s_n"][pos] = top.shares
        out["sigma"][pos] = top.sigma
        out["s_low"][pos], out["s_x"][pos] = aug.shares
        out["sigma_aug"][pos] = aug.sigma
        q, p = tech.base_quantity, tech.base_price
        out["y0"][pos], out["n0"][pos], out["l0"][pos], out["x0"][pos] = (
            q["output"], q["n"], q["land"], q["nonland"])
        out["rent0"][pos] = p["land"]
        if practice == IRRIGATED:
            irrigated[pos] = True
            lw = aug.children[0]
            out["s_land"][pos], out["s_water"][pos] = lw.shares
            out["sigma_lw"][pos] = lw.sigma
            out["w0"][pos] = q["water"]
    out["irrigated"] = irrigated
    return out


class _Model:
    """Residual evaluation for one calibrated economy and one set of shocks."""

    def __init__(self, cal: CalibratedEconomy, shocks: CellShocks, opts: SolverOptions):
        self.cal, self.shocks, self.opts = cal, shocks, opts
        self.params = cal.params
        self.arr = _unit_arrays(cal)
        u = cal.units
        cell = u["cell_index"]
        self.kappa = shocks.land_cost_per_ha[cell]
        self.endow = shocks.endowment_factor[cell]
        self.wedge = shocks.n_price_wedge
        self.region = u["region_index"]
        self.n_regions = len(u["regions"])
        self.region_members = [np.flatnonzero(self.region == r) for r in range(self.n_regions)]
        a = self.arr
        self.y_total0 = math.fsum(a["y0"])
        self.n_total0 = math.fsum(a["n0"])
        self.x_total0 = np.array([math.fsum(a["x0"][m]) for m in self.region_members])
        self.world_demand0 = self.y_total0 / self.params.us_supply_share
        self.row_supply0 = self.world_demand0 - self.y_total0
        self.n_free = math.isfinite(self.params.n_supply_elasticity)
        self.x_free = math.isfinite(self.params.nonland_supply_elasticity)
        k = max(1, min(opts.threads, cal.n_units))
        bounds = np.linspace(0, cal.n_units, k + 1).astype(int)
        self.chunks = [np.arange(bounds[i], bounds[i + 1]) for i in range(k)]
        self.evaluations = 0

    # market layout ----------------------------------------------------------
    def names(self):
        out = ["crop"]
        if self.n_free:
            out.append("n")
        if self.x_free:
            out += [f"nonland:{r}" for r in self.cal.units["regions"]]
        return out

    def pack(self, crop, n, nonland):
        z = [math.log(crop)]
        if self.n_free:
            z.append(math.log(n))
        if self.x_free:
            z += list(np.log(nonland))
        return np.array(z)

    def unpack(self, z):
        p0 = self.params
        num = self.opts.numeraire
        crop = math.exp(z[0])
        i = 1
        n = p0.national_n_price * num
        if self.n_free:
            n = math.exp(z[i])
            i += 1
        x = np.full(self.n_regions, num)
        if self.x_free:
            x = np.exp(z[i:i + self.n_regions])
        return crop, n, x

    # unit responses ---------------------------------------------------------
    def _respond_chunk(self, idx, pc, pn, px):
        a = {k: v[idx] for k, v in self.arr.items()}
        p0, sh = self.params, self.shocks
        kappa, endow = self.kappa[idx], self.endow[idx]
        eta_l, eta_w = p0.land_supply_elasticity, p0.water_supply_elasticity

        pi_c = np.full(len(idx), pc * sh.productivity / p0.crop_price)
        pi_n = (pn + self.wedge[idx]) / (p0.national_n_price * sh.efficiency_shifter)
        pi_x = px[self.region[idx]]
        pi_aug = ces_solve_price(pi_c, a["s_n"], pi_n, a["s_aug"], a["sigma"])
        pi_low = ces_solve_price(pi_aug, a["s_x"], pi_x, a["s_low"], a["sigma_aug"])

        irr = a["irrigated"]
        pi_le = np.where(irr, np.nan, pi_low)
        pi_w = np.full(len(idx), np.nan)
        if irr.any():
            pi_le[irr], pi_w[irr] = self._water_rent(
                pi_low[irr], a["s_land"][irr], a["s_water"][irr], a["sigma_lw"][irr],
                a["rent0"][irr], kappa[irr], endow[irr], eta_l, eta_w)

        rent = pi_le * a["rent0"] - kappa
        with np.errstate(invalid="ignore", divide="ignore"):
            land = a["l0"] * endow * np.power(rent / a["rent0"], eta_l)
            sig, sig_a = a["sigma"], a["sigma_aug"]
            aug_per_f = np.power(pi_aug / pi_c, -sig)
            low_per_aug = np.power(pi_low / pi_aug, -sig_a)
            land_per_low = np.where(irr, np.power(pi_le / pi_low, -np.nan_to_num(a["sigma_lw"], nan=1.0)), 1.0)
            f = land / a["l0"] / (aug_per_f * low_per_aug * land_per_low)
            n_eff = a["n0"] * f * np.power(pi_n / pi_c, -sig)
            nonland = a["x0"] * f * aug_per_f * np.power(pi_x / pi_aug, -sig_a)
            water = np.where(irr, a["w0"] * np.power(pi_w, eta_w), 0.0)
        feasible = np.isfinite(f) & (rent > 0) & np.isfinite(pi_aug) & np.isfinite(pi_low)
        return {
            "feasible": feasible, "rent": rent, "water_rent": np.where(irr, pi_w, np.nan),
            "land": land, "output": sh.productivity * a["y0"] * f, "f": f,
            "n_eff": n_eff, "n_use": n_eff / sh.efficiency_shifter, "nonland": nonland, "water": water,
        }

    def _water_rent(self, pi_lw, s_l, s_w, sig, rent0, kappa, endow, eta_l, eta_w):
        """Clear each irrigated unit's land and water markets by bisection on log water rent."""

        def land_price(u):
            return ces_solve_price(pi_lw, s_w, np.exp(u), s_l, sig)

        def g(u):
            ple = land_price(u)
            r = ple * rent0 - kappa
            with np.errstate(invalid="ignore", divide="ignore"):
                val = (np.log(endow) + eta_l * np.log(r / rent0) - eta_w * u + sig * (np.log(ple) - u))
            return np.where(np.isfinite(ple) & (r > 0), val, -np.inf)

        # water rent at which the land rent hits zero bounds the search from above
        with np.errstate(invalid="ignore", divide="ignore"):
            w_max = ces_solve_price(pi_lw, s_l, kappa / rent0, s_w, sig)
            hi = np.where(np.isfinite(w_max) & (w_max > 0), np.log(w_max), np.log(pi_lw) + 50.0)
        hi = np.where(np.isfinite(hi), hi, 50.0)
        for _ in range(8):
            bad = ~(g(hi) < 0)
            if not bad.any():
                break
            hi = np.where(bad, hi + 50.0, hi)
        lo = hi - 60.0
        for _ in range(8):
            bad = ~(g(lo) > 0)
            if not bad.any():
                break
            lo = np.where(bad, lo - 60.0, lo)
        ok = (g(lo) > 0) & (g(hi) < 0)
        for _ in range(self.opts.bisection_iters):
            mid = 0.5 * (lo + hi)
            up = g(mid) > 0
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
        u = 0.5 * (lo + hi)
        ple = land_price(u)
        return np.where(ok, ple, np.nan), np.where(ok, np.exp(u), np.nan)

    def respond(self, pc, pn, px):
        if len(self.chunks) == 1:
            return self._respond_chunk(self.chunks[0], pc, pn, px)
        with ThreadPoolExecutor(len(self.chunks)) as ex:
            parts = list(ex.map(lambda idx: self._respond_chunk(idx, pc, pn, px), self.chunks))
        return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}

    # markets ----------------------------------------------------------------
    def market_residuals(self, pc, pn, px, resp):
        """Relative excess demands (demand - supply) / baseline volume, all markets."""
        p0 = self.params
        rel = pc / p0.crop_price
        net = (self.world_demand0 * rel ** p0.demand_elasticity
               - self.row_supply0 * rel ** p0.row_supply_elasticity)
        out = {"crop": (net - math.fsum(resp["output"])) / self.y_total0}
        if self.n_free:
            supply = self.n_total0 * (pn / p0.national_n_price) ** p0.n_supply_elasticity
            out["n"] = (math.fsum(resp["n_use"]) - supply) / self.n_total0
        if self.x_free:
            for r, m in enumerate(self.region_members):
                supply = self.x_total0[r] * px[r] ** p0.nonland_supply_elasticity
                out[f"nonland:{self.cal.units['regions'][r]}"] = (
                    (math.fsum(resp["nonland"][m]) - supply) / self.x_total0[r])
        return out

    def residual(self, z):
        self.evaluations += 1
        crop, n, x = self.unpack(z)
        num = self.opts.numeraire
        pc, pn, px = crop / num, n / num, x / num
        resp = self.respond(pc, pn, px)
        if not resp["feasible"].all():
            return None, resp
        r = self.market_residuals(pc, pn, px, resp)
        return np.array(list(r.values())), resp


# --------------------------------------------------------------------------- solve

def _jacobian(model: _Model, z, h):
    k = len(z)
    jac = np.empty((k, k))
    for j in range(k):
        zp, zm = z.copy(), z.copy()
        zp[j] += h
        zm[j] -= h
        fp, _ = model.residual(zp)
        fm, _ = model.residual(zm)
        if fp is None or fm is None:
            return None
        jac[:, j] = (fp - fm) / (2 * h)
    return jac


def _newton(model: _Model, z0):
    opts = model.opts
    z = z0.copy()
    f, resp = model.residual(z)
    if f is None:
        raise ConvergenceError("starting prices are infeasible", {"iterations": 0, "converged": False})
    history = [float(np.max(np.abs(f)))]
    halvings = 0
    it = 0
    while history[-1] >= opts.tol:
        if it >= opts.max_iter:
            raise ConvergenceError(f"no convergence after {it} iterations",
                                   {"iterations": it, "converged": False, "max_residual": history[-1],
                                    "history": history, "prices": model.unpack(z)})
        it += 1
        jac = _jacobian(model, z, opts.fd_step)
        if jac is None:
            step = -0.1 * np.sign(f)
        else:
            try:
                step = np.linalg.solve(jac, -f)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        big = np.max(np.abs(step))
        if big > opts.max_log_step:
            step *= opts.max_log_step / big
        lam = 1.0
        norm = np.linalg.norm(f)
        for _ in range(opts.max_halvings + 1):
            f_new, resp_new = model.residual(z + lam * step)
            if f_new is not None and np.linalg.norm(f_new) < norm:
                break
            lam *= 0.5
            halvings += 1
        else:
            raise ConvergenceError("line search failed; residual would not decrease",
                                   {"iterations": it, "converged": False, "max_residual": history[-1],
                                    "history": history, "prices": model.unpack(z)})
        z = z + lam * step
        f, resp = f_new, resp_new
        history.append(float(np.max(np.abs(f))))
    return z, f, resp, {"iterations": it, "halvings": halvings, "history": history}


def _initial_guess(model: _Model, initial: MarketSystem | None):
    num = model.opts.numeraire
    if initial is None:
        p0 = model.params
        return model.pack(p0.crop_price * num, p0.national_n_price * num, np.full(model.n_regions, num))
    scale = num / initial.numeraire
    return model.pack(initial.crop_price * scale, initial.n_price * scale,
                      np.asarray(initial.nonland_price) * scale)


def _foc_gap(model: _Model, pc, pn, px, resp):
    """Largest relative gap between value marginal product and effective input price."""
    cal, sh = model.cal, model.shocks
    worst = 0.0
    for practice, (pos, tech) in cal.groups.items():
        q = {"land": resp["land"][pos], "nonland": resp["nonland"][pos], "n": resp["n_eff"][pos]}
        prices = {"land": resp["rent"][pos] + model.kappa[pos], "nonland": px[model.region[pos]],
                  "n": (pn + model.wedge[pos]) / sh.efficiency_shifter}
        if practice == IRRIGATED:
            q["water"] = resp["water"][pos]
            prices["water"] = resp["water_rent"][pos]
        mp = tech.marginal_products(q)
        for k, m in mp.items():
            gap = np.abs(pc * sh.productivity * m / prices[k] - 1.0)
            worst = max(worst, float(np.max(gap)))
    return worst


def _value_gap(model: _Model, pc, pn, px, resp):
    """Revenue minus total factor payments (incl. tax and BMP cost), relative to revenue."""
    revenue = pc * resp["output"]
    water_bill = np.where(model.arr["irrigated"], resp["water_rent"] * resp["water"], 0.0)
    cost = ((resp["rent"] + model.kappa) * resp["land"] + water_bill + px[model.region] * resp["nonland"]
            + (pn + model.wedge) * resp["n_use"])
    per_unit = float(np.max(np.abs(revenue - cost) / revenue))
    total = abs(math.fsum(revenue) - math.fsum(cost)) / math.fsum(revenue)
    return per_unit, total


def _tables(model: _Model, resp, counter: ClampCounter):
    cal, sh = model.cal, model.shocks
    u = cal.units
    land = resp["land"]
    n_kg = resp["n_use"] * 1000.0 / land
    beyond = int(np.count_nonzero(n_kg > u["n_max"]))
    if beyond:
        logger.warning("%d unit(s) apply N beyond the leaching fit's operating range", beyond)
    field_leach = land * quadratic_leaching(u["alpha"], u["beta"], n_kg, counter) / 1000.0
    leach = field_leach * sh.leach_multiplier[u["cell_index"]]
    units = pd.DataFrame({
        "cell_id": u["cell_id"], "practice": u["practice"], "land": land, "n_use": resp["n_use"],
        "n_rate": n_kg, "output": resp["output"], "nonland": resp["nonland"], "water": resp["water"],
        "field_leaching": field_leach, "leaching": leach,
    })
    cf = cal.baseline.cell_frame
    idx = u["cell_index"]
    n_cells = len(cf)

    def per_cell(v):
        return np.bincount(idx, weights=v, minlength=n_cells)

    cells = pd.DataFrame({
        "cell_id": cf.cell_id.to_numpy(), "state_code": cf.state_code.to_numpy(),
        "region_code": cf.region_code.to_numpy(), "lon": cf.lon.to_numpy(), "lat": cf.lat.to_numpy(),
        "land": per_cell(land), "n_use": per_cell(resp["n_use"]), "output": per_cell(resp["output"]),
        "leaching": per_cell(leach), "leach_multiplier": sh.leach_multiplier,
        "wetland_share": sh.wetland_share, "cd_share": sh.cd_share,
    })
    with np.errstate(invalid="ignore", divide="ignore"):
        cells["n_rate"] = np.where(cells.land > 0, cells.n_use * 1000.0 / cells.land, 0.0)
    totals = {k: math.fsum(units[k]) for k in ("land", "n_use", "output", "leaching", "field_leaching")}
    return units, cells, totals, beyond


def solve(cal: CalibratedEconomy, scenario: PolicyScenario = NULL, opts: SolverOptions = SolverOptions(),
          bmp: BmpSettings = BmpSettings(), initial: MarketSystem | None = None,
          shocks: CellShocks | None = None) -> EquilibriumSolution:
    """Solve the post-shock equilibrium.

    Raises :class:`ConvergenceError` (with diagnostics) when Newton stalls;
    no partial answer is returned as if converged.
    """
    t0 = time.perf_counter()
    shocks = policy_shocks(cal, scenario, bmp) if shocks is None else shocks
    model = _Model(cal, shocks, opts)
    z, f, resp, info = _newton(model, _initial_guess(model, initial))
    crop, n, x = model.unpack(z)
    num = opts.numeraire
    pc, pn, px = crop / num, n / num, x / num
    counter = ClampCounter()
    units, cells, totals, beyond = _tables(model, resp, counter)
    prices = MarketSystem(crop, n, x, num, land_rent=resp["rent"] * num,
                          water_rent=resp["water_rent"] * num)
    residuals = dict(zip(model.names(), (float(v) for v in f)))
    unit_gap, total_gap = _value_gap(model, pc, pn, px, resp)
    diagnostics = {
        "converged": True,
        "max_residual": float(np.max(np.abs(f))),
        "iterations": info["iterations"],
        "halvings": info["halvings"],
        "residual_history": info["history"],
        "evaluations": model.evaluations,
        "fallback_count": cal.sigma_fallback_count,
        "clamp_count": counter.count,
        "beyond_operating_range": beyond,
        "foc_gap": _foc_gap(model, pc, pn, px, resp),
        "value_gap_unit": unit_gap,
        "value_gap_total": total_gap,
        "seconds": time.perf_counter() - t0,
    }
    return EquilibriumSolution(scenario.label, prices, units, cells, totals, residuals, diagnostics, scenario)


def excess_demands(system: MarketSystem, cal: CalibratedEconomy, scenario: PolicyScenario = NULL,
                   opts: SolverOptions = SolverOptions(), bmp: BmpSettings = BmpSettings()) -> dict:
    """Relative excess demand of every cleared market at ``system``'s macro prices.

    Keys are ``crop``, ``n`` (unless the N price is fixed) and ``nonland:<region>``
    (unless the nonland price is fixed). Land and water markets clear by
    construction. Infeasible prices (some unit cannot cover its costs) raise.
    """
    if system.crop_price <= 0 or system.n_price <= 0 or np.any(np.asarray(system.nonland_price) <= 0):
        raise ValueError("prices must be > 0")
    model = _Model(cal, policy_shocks(cal, scenario, bmp), replace(opts, numeraire=system.numeraire))
    pc, pn, px = system.real()
    resp = model.respond(pc, pn, np.broadcast_to(px, (model.n_regions,)).astype(float))
    if not resp["feasible"].all():
        raise ValueError("some units cannot cover their costs at these prices")
    return model.market_residuals(pc, pn, px, resp)


def baseline_system(cal: CalibratedEconomy, numeraire: float = 1.0) -> MarketSystem:
    p = cal.params
    n_regions = len(cal.units["regions"])
    return MarketSystem(p.crop_price * numeraire, p.national_n_price * numeraire,
                        np.full(n_regions, numeraire), numeraire)


# --------------------------------------------------------------------------- closure

@dataclass(frozen=True, eq=False)
class ClosureResult:
    shift: float
    solution: EquilibriumSolution
    quantity_changes: dict  # percent change against baseline


def target_price_closure(cal: CalibratedEconomy, target_price: float, scenario: PolicyScenario = NULL,
                         opts: SolverOptions = SolverOptions(), bmp: BmpSettings = BmpSettings(),
                         xtol: float = 1e-12) -> ClosureResult:
    """Productivity shift that makes the solved real crop price equal ``target_price``."""
    if not target_price > 0:
        raise ClosureError("target price must be > 0")
    base = solve(cal, scenario.relabel("closure-base"), opts, bmp) if not scenario.is_null else None

    def price(s):
        sol = solve(cal, replace(scenario, productivity_shift=s, label="closure"), opts, bmp)
        return sol.prices.crop_price / opts.numeraire

    def gap(s):
        return price(s) - target_price

    p0 = cal.params.crop_price
    if abs(target_price - p0) <= 1e-15 * p0 and scenario.is_null:
        s = 0.0
    else:
        lo, hi = -0.2, 0.2
        g_lo, g_hi = gap(lo), gap(hi)
        for _ in range(20):
            if g_lo * g_hi <= 0:
                break
            if g_lo < 0:  # price too low even at the most negative shift
                lo = -1 + (1 + lo) / 2
                g_lo = gap(lo)
            else:
                hi *= 2
                g_hi = gap(hi)
        else:
            raise ClosureError(f"target price {target_price} outside the feasible band")
        try:
            s = brentq(gap, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
        except (ValueError, RuntimeError) as exc:
            raise ClosureError(str(exc)) from exc
    sol = solve(cal, replace(scenario, productivity_shift=s, label="closure"), opts, bmp)
    rel = abs(sol.prices.crop_price / opts.numeraire - target_price) / target_price
    if rel > 1e-6:
        raise ClosureError(f"closure missed the target by {rel:.3g} (relative)")
    ref = base.totals if base is not None else _baseline_totals(cal)
    changes = {k: 100.0 * (sol.totals[k] / ref[k] - 1.0) for k in ("output", "n_use", "land", "leaching")}
    return ClosureResult(s, sol, changes)


def _baseline_totals(cal: CalibratedEconomy) -> dict:
    u = cal.units
    n_use = u["area"] * u["n_rate"] / 1000.0
    field = u["area"] * quadratic_leaching(u["alpha"], u["beta"], u["n_rate"]) / 1000.0
    pos_out = np.zeros(cal.n_units)
    for _, (pos, tech) in cal.groups.items():
        pos_out[pos] = tech.base_quantity["output"]
    return {"land": math.fsum(u["area"]), "n_use": math.fsum(n_use), "output": math.fsum(pos_out),
            "leaching": math.fsum(field), "field_leaching": math.fsum(field)}


__all__ = [
    "SolverOptions", "MarketSystem", "EquilibriumSolution", "ConvergenceError", "ClosureError",
    "ClosureResult", "solve", "excess_demands", "baseline_system", "target_price_closure",
]
