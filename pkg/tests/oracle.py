"""Brute-force primal oracle for small economies.

Shares nothing with the package's solver beyond the raw baseline table: the
calibration arithmetic, the land/N elasticity (from mpmath derivatives of the
yield curve) and the nested CES production function are all rebuilt here.

Each unit maximises profit plus land- and water-owner surplus,

    P_c F(L, W, X, N) - p_x X - (p_N + theta t) N - kappa L
        - int_0^L r_s(l) dl - int_0^W w_s(w) dw,

whose optimum is the local market equilibrium. Macro prices (crop, N) are
located by a coarse 2-D grid and then refined with nested brentq.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
from scipy.optimize import brentq, minimize

mp.mp.dps = 30


def gompertz_sigma(a, b, c, n):
    f = lambda x: a * mp.e ** (-b * mp.power(c, x))  # noqa: E731
    y, d1, d2 = f(n), mp.diff(f, n), mp.diff(f, n, 2)
    return float(d1 * (y - n * d1) / (-n * d2 * y))


class Unit:
    """Primal technology of one (cell, practice) unit in relative-quantity CES form."""

    def __init__(self, row, params):
        p = params
        self.irrigated = row.practice == "irrigated"
        area, n_rate, yld = float(row.crop_area), float(row.n_rate), float(row.baseline_yield)
        self.y0 = area * yld / 1000.0
        self.n0 = area * n_rate / 1000.0
        self.l0 = area
        rev = p.crop_price * self.y0
        ncost = p.national_n_price * self.n0
        aug = rev - ncost
        self.s_n = ncost / rev
        self.sigma = gompertz_sigma(float(row.a), float(row.b), float(row.c), n_rate)
        self.sigma_aug = p.sigma_composite_nonland
        if self.irrigated:
            lw = p.land_water_share * aug
            self.w0 = p.water_value_share * lw
            land_value = lw - self.w0
            self.x0 = aug - lw
            self.s_low = p.land_water_share
            self.s_w = p.water_value_share
            self.sigma_lw = p.sigma_land_water
        else:
            land_value = p.land_value_share * aug
            self.x0 = aug - land_value
            self.s_low = p.land_value_share
            self.w0 = None
        self.r0 = land_value / area
        self.theta = float(row.alpha) + float(row.beta) * n_rate
        self.alpha, self.beta = float(row.alpha), float(row.beta)
        self.cell_id = int(row.cell_id)
        self.practice = row.practice

    # CES pieces: value and gradient w.r.t. relative child quantities
    @staticmethod
    def _ces(shares, q, sigma):
        if abs(sigma - 1) < 1e-12:
            v = math.prod(qi ** si for si, qi in zip(shares, q))
            return v, [si * v / qi for si, qi in zip(shares, q)]
        rho = (sigma - 1) / sigma
        inner = sum(si * qi ** rho for si, qi in zip(shares, q))
        v = inner ** (1 / rho)
        return v, [si * qi ** (rho - 1) * v ** (1 - rho) for si, qi in zip(shares, q)]

    def output(self, L, W, X, N):
        """Output (tons) and its gradient with respect to (L, W, X, N)."""
        ql, qx, qn = L / self.l0, X / self.x0, N / self.n0
        if self.irrigated:
            qw = W / self.w0
            lw, (dl, dw) = self._ces((1 - self.s_w, self.s_w), (ql, qw), self.sigma_lw)
            low = lw
        else:
            low, dl, dw = ql, 1.0, 0.0
        aug, (dlow, dx) = self._ces((self.s_low, 1 - self.s_low), (low, qx), self.sigma_aug)
        top, (daug, dn) = self._ces((1 - self.s_n, self.s_n), (aug, qn), self.sigma)
        y = self.y0 * top
        g = [self.y0 * daug * dlow * dl / self.l0,
             self.y0 * daug * dlow * dw / self.w0 if self.irrigated else 0.0,
             self.y0 * daug * dx / self.x0,
             self.y0 * dn / self.n0]
        return y, g

    def respond(self, pc, pn, tax, params, kappa=0.0, endow=1.0, px=1.0):
        """Surplus-maximising (L, W, X, N) at crop price ``pc`` and N price ``pn``."""
        eta_l, eta_w = params.land_supply_elasticity, params.water_supply_elasticity
        le0 = self.l0 * endow
        scale = params.crop_price * self.y0
        cn = pn + self.theta * tax

        def obj(z):
            L, W, X, N = np.exp(z)
            if not self.irrigated:
                W = 0.0
            y, g = self.output(L, W, X, N)
            k = 1 + 1 / eta_l
            land_cost = self.r0 * le0 / k * (L / le0) ** k
            d_land = self.r0 * (L / le0) ** (1 / eta_l)
            val = pc * y - px * X - cn * N - kappa * L - land_cost
            grad = [pc * g[0] - kappa - d_land, 0.0, pc * g[2] - px, pc * g[3] - cn]
            if self.irrigated:
                kw = 1 + 1 / eta_w
                val -= self.w0 / kw * (W / self.w0) ** kw
                grad[1] = pc * g[1] - (W / self.w0) ** (1 / eta_w)
            # chain rule for log variables; maximise -> minimise negative
            gz = -np.array(grad) * np.array([L, W, X, N]) / scale
            return -val / scale, gz

        z0 = np.log([self.l0, self.w0 if self.irrigated else 1.0, self.x0, self.n0])
        res = minimize(obj, z0, jac=True, method="L-BFGS-B",
                       options={"ftol": 1e-15, "gtol": 1e-13, "maxiter": 2000, "maxcor": 20})
        # a few Newton-free polishing restarts tighten the optimum
        for _ in range(2):
            res = minimize(obj, res.x, jac=True, method="L-BFGS-B",
                           options={"ftol": 1e-16, "gtol": 1e-14, "maxiter": 2000, "maxcor": 20})
        L, W, X, N = np.exp(res.x)
        y, _ = self.output(L, W if self.irrigated else 0.0, X, N)
        return {"land": L, "water": W if self.irrigated else 0.0, "nonland": X, "n_use": N, "output": y}


class OracleEconomy:
    """Fixed nonland price, endogenous crop and N prices."""

    def __init__(self, table, params):
        self.params = params
        self.units = [Unit(r, params) for r in table[table.crop_area > 0].itertuples()]
        self.y_total0 = math.fsum(u.y0 for u in self.units)
        self.n_total0 = math.fsum(u.n0 for u in self.units)

    def responses(self, pc, pn, tax):
        return [u.respond(pc, pn, tax, self.params) for u in self.units]

    def excess(self, pc, pn, tax):
        p = self.params
        resp = self.responses(pc, pn, tax)
        rel = pc / p.crop_price
        world = self.y_total0 / p.us_supply_share
        net = world * rel ** p.demand_elasticity - (world - self.y_total0) * rel ** p.row_supply_elasticity
        crop = (net - math.fsum(r["output"] for r in resp)) / self.y_total0
        n_supply = self.n_total0 * (pn / p.national_n_price) ** p.n_supply_elasticity
        n = (math.fsum(r["n_use"] for r in resp) - n_supply) / self.n_total0
        return crop, n

    def solve(self, tax, grid=7, span=0.25):
        p = self.params
        pcs = p.crop_price * np.linspace(1 - span, 1 + span, grid)
        pns = p.national_n_price * np.linspace(1 - span, 1 + span, grid)
        best = None
        for pc in pcs:
            for pn in pns:
                e = np.hypot(*self.excess(pc, pn, tax))
                if best is None or e < best[0]:
                    best = (e, pc, pn)
        _, pc_g, pn_g = best
        dc, dn = (pcs[1] - pcs[0]) * 2, (pns[1] - pns[0]) * 2

        def crop_clear(pn):
            return brentq(lambda pc: self.excess(pc, pn, tax)[0], pc_g - dc, pc_g + dc, xtol=1e-13, rtol=1e-15)

        def n_gap(pn):
            return self.excess(crop_clear(pn), pn, tax)[1]

        pn = brentq(n_gap, pn_g - dn, pn_g + dn, xtol=1e-12, rtol=1e-15)
        pc = crop_clear(pn)
        return pc, pn, self.responses(pc, pn, tax)
