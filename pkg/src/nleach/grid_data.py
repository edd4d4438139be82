"""Grid-cell baseline data: model, delimited-file IO and a seeded synthetic generator.

A baseline table has one row per (cell, practice). Cell-level columns are
repeated on both practice rows of a cell and must agree. See
``docs/schema.md`` for the column list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from functools import cached_property
from pathlib import Path

import numpy as np
import pandas as pd

from .bmp import MonthlyClimate
from .leaching import LeachingResponse
from .transfer import TransferFunction

IRRIGATED = "irrigated"
RAINFED = "rainfed"
PRACTICES = (IRRIGATED, RAINFED)

DRAIN_COLUMNS = [f"q{m:02d}" for m in range(1, 13)]
TEMP_COLUMNS = [f"t{m:02d}" for m in range(1, 13)]

CELL_COLUMNS = [
    "cell_id", "lon", "lat", "state_code", "region_code",
    "tile_drained_fraction", "cd_suitable_fraction", "wetland_suitable_fraction",
    "in_mississippi_basin",
]
UNIT_COLUMNS = ["practice", "crop_area", "n_rate", "baseline_yield", "a", "b", "c", "alpha", "beta", "n_max"]
REQUIRED_COLUMNS = CELL_COLUMNS[:1] + UNIT_COLUMNS[:1] + CELL_COLUMNS[1:] + UNIT_COLUMNS[1:]
COLUMNS = REQUIRED_COLUMNS + DRAIN_COLUMNS + TEMP_COLUMNS
TEXT_COLUMNS = {"practice", "state_code", "region_code"}

MAX_REPORTED = 10


class BaselineError(ValueError):
    """Baseline data failed to parse or violates an invariant."""


@dataclass(frozen=True)
class GridCell:
    cell_id: int
    lon: float
    lat: float
    state_code: str
    region_code: str
    crop_area_irrigated: float
    crop_area_rainfed: float
    n_rate_irrigated: float
    n_rate_rainfed: float
    yield_irrigated: float
    yield_rainfed: float
    tile_drained_fraction: float
    cd_suitable_fraction: float
    wetland_suitable_fraction: float
    in_mississippi_basin: bool
    climate: MonthlyClimate | None = None

    @property
    def crop_area(self) -> float:
        return self.crop_area_irrigated + self.crop_area_rainfed

    @property
    def baseline_yield(self) -> float:
        """Area-weighted corn-equivalent yield, kg/ha."""
        if self.crop_area == 0:
            return 0.0
        return (self.crop_area_irrigated * self.yield_irrigated
                + self.crop_area_rainfed * self.yield_rainfed) / self.crop_area


@dataclass(frozen=True)
class MarketParams:
    """Economy-wide prices, elasticities and lower-nest technology defaults."""

    crop_price: float = 26.78  # currency per ton crop
    national_n_price: float = 210.0  # currency per ton N
    demand_elasticity: float = -0.5  # world crop demand
    us_supply_share: float = 0.35  # US share of world crop supply at baseline
    row_supply_elasticity: float = 0.3
    n_supply_elasticity: float = 1.0  # math.inf fixes the N price
    nonland_supply_elasticity: float = 1.0  # math.inf fixes the nonland price
    land_supply_elasticity: float = 0.25
    water_supply_elasticity: float = 0.5
    sigma_land_water: float = 0.1
    sigma_composite_nonland: float = 0.5
    sigma_fallback: float = 0.5
    land_value_share: float = 0.4  # rainfed: land share of augmented-land value
    land_water_share: float = 0.45  # irrigated: land-water composite share of augmented land
    water_value_share: float = 0.3  # irrigated: water share of the land-water composite

    def __post_init__(self):
        if not self.demand_elasticity < 0:
            raise ValueError("demand_elasticity must be < 0")
        if not 0 < self.us_supply_share <= 1:
            raise ValueError("us_supply_share must lie in (0, 1]")
        for name in ("row_supply_elasticity", "n_supply_elasticity", "nonland_supply_elasticity",
                     "land_supply_elasticity", "water_supply_elasticity"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("sigma_land_water", "sigma_composite_nonland"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        for name in ("land_value_share", "land_water_share", "water_value_share"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not self.sigma_fallback > 0:
            raise ValueError("sigma_fallback must be > 0")

    def updated(self, **overrides) -> "MarketParams":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown market parameter(s): {sorted(unknown)}")
        return replace(self, **overrides)


@dataclass(frozen=True, eq=False)
class BaselineEconomy:
    """Immutable baseline: the long (cell, practice) table plus market parameters."""

    table: pd.DataFrame
    params: MarketParams = field(default_factory=MarketParams)

    @property
    def n_cells(self) -> int:
        return len(self.cell_frame)

    @cached_property
    def cell_frame(self) -> pd.DataFrame:
        """One row per cell, ordered by cell_id."""
        cols = CELL_COLUMNS + (DRAIN_COLUMNS + TEMP_COLUMNS if self.has_climate else [])
        return self.table.drop_duplicates("cell_id")[cols].reset_index(drop=True)

    @property
    def cell_ids(self) -> np.ndarray:
        return self.cell_frame["cell_id"].to_numpy()

    @property
    def has_climate(self) -> bool:
        return all(c in self.table.columns for c in DRAIN_COLUMNS + TEMP_COLUMNS)

    def climate_arrays(self):
        """``(drainflow, air_temp)`` arrays of shape (n_cells, 12)."""
        if not self.has_climate:
            raise BaselineError("baseline carries no monthly climate columns")
        cf = self.cell_frame
        return cf[DRAIN_COLUMNS].to_numpy(float), cf[TEMP_COLUMNS].to_numpy(float)

    def _unit_row(self, cell_id: int, practice: str):
        rows = self.table[(self.table.cell_id == cell_id) & (self.table.practice == practice)]
        if rows.empty:
            raise KeyError(f"no {practice} row for cell {cell_id}")
        return rows.iloc[0]

    def transfer(self, cell_id: int, practice: str) -> TransferFunction:
        r = self._unit_row(cell_id, practice)
        return TransferFunction(float(r.a), float(r.b), float(r.c))

    def leaching_response(self, cell_id: int, practice: str) -> LeachingResponse:
        r = self._unit_row(cell_id, practice)
        return LeachingResponse(float(r.alpha), float(r.beta), float(r.n_max))

    def cell(self, cell_id: int) -> GridCell:
        rows = self.table[self.table.cell_id == cell_id]
        if rows.empty:
            raise KeyError(f"no cell {cell_id}")
        return _cell_from_rows(rows, self.has_climate)

    def cells(self) -> list[GridCell]:
        return [_cell_from_rows(g, self.has_climate) for _, g in self.table.groupby("cell_id", sort=True)]

    def with_params(self, params: MarketParams) -> "BaselineEconomy":
        return BaselineEconomy(self.table, params)


def _cell_from_rows(rows: pd.DataFrame, has_climate: bool) -> GridCell:
    first = rows.iloc[0]
    by_practice = {r.practice: r for r in rows.itertuples()}

    def unit(practice, attr):
        r = by_practice.get(practice)
        return float(getattr(r, attr)) if r is not None else 0.0

    climate = None
    if has_climate:
        climate = MonthlyClimate(tuple(first[DRAIN_COLUMNS]), tuple(first[TEMP_COLUMNS]))
    return GridCell(
        cell_id=int(first.cell_id), lon=float(first.lon), lat=float(first.lat),
        state_code=str(first.state_code), region_code=str(first.region_code),
        crop_area_irrigated=unit(IRRIGATED, "crop_area"), crop_area_rainfed=unit(RAINFED, "crop_area"),
        n_rate_irrigated=unit(IRRIGATED, "n_rate"), n_rate_rainfed=unit(RAINFED, "n_rate"),
        yield_irrigated=unit(IRRIGATED, "baseline_yield"), yield_rainfed=unit(RAINFED, "baseline_yield"),
        tile_drained_fraction=float(first.tile_drained_fraction),
        cd_suitable_fraction=float(first.cd_suitable_fraction),
        wetland_suitable_fraction=float(first.wetland_suitable_fraction),
        in_mississippi_basin=bool(first.in_mississippi_basin),
        climate=climate,
    )


# --------------------------------------------------------------------------- validation

def _violations(df: pd.DataFrame) -> list[tuple[int, str, str]]:
    out = []

    def flag(mask, column, message):
        for cid in df.loc[mask, "cell_id"]:
            out.append((int(cid), column, message))

    for col in ("crop_area", "n_rate", "baseline_yield"):
        flag(df[col] < 0, col, "must be >= 0")
    for col in ("tile_drained_fraction", "cd_suitable_fraction", "wetland_suitable_fraction"):
        flag((df[col] < 0) | (df[col] > 1), col, "must lie in [0, 1]")
    flag(df.cd_suitable_fraction > df.tile_drained_fraction, "cd_suitable_fraction",
         "cd_suitable_fraction <= tile_drained_fraction violated")
    flag(~df.practice.isin(PRACTICES), "practice", f"must be one of {PRACTICES}")
    flag(~df.in_mississippi_basin.isin([0, 1]), "in_mississippi_basin", "must be 0 or 1")
    flag(df.a <= 0, "a", "must be > 0")
    flag(df.b <= 0, "b", "must be > 0")
    flag((df.c <= 0) | (df.c >= 1), "c", "must lie in (0, 1)")
    flag(df.n_max <= 0, "n_max", "must be > 0")
    flag(df.n_rate > df.n_max, "n_rate", "baseline rate exceeds n_max")
    # L(n)/n = alpha + beta*n is linear, so endpoint checks cover [0, n_max]
    top = df.alpha + df.beta * df.n_max
    flag((df.alpha < 0) | (df.alpha > 1) | (top < 0) | (top > 1), "alpha",
         "leaching intensity leaves [0, 1] on [0, n_max]")
    flag((df.alpha + 2 * df.beta * df.n_max) < 0, "beta", "leaching decreasing in n on [0, n_max]")
    if all(c in df.columns for c in DRAIN_COLUMNS):
        flag((df[DRAIN_COLUMNS] < 0).any(axis=1), "q01..q12", "drainflow must be >= 0")

    dup = df.duplicated(["cell_id", "practice"])
    flag(dup, "practice", "duplicate (cell_id, practice) row")
    cell_cols = [c for c in CELL_COLUMNS[1:] + DRAIN_COLUMNS + TEMP_COLUMNS if c in df.columns]
    inconsistent = df.groupby("cell_id")[cell_cols].nunique(dropna=False).gt(1).any(axis=1)
    for cid in inconsistent[inconsistent].index:
        out.append((int(cid), "cell columns", "practice rows disagree on cell-level fields"))
    return out


def validate_table(df: pd.DataFrame) -> pd.DataFrame:
    """Check and normalise a baseline table; raises :class:`BaselineError`."""
    if len(df) == 0:
        raise BaselineError("no cells")
    missing = [c for c in REQUIRED_COLUMNS if c not in df.columns]
    if missing:
        raise BaselineError(f"missing columns: {missing}")
    climate_cols = [c for c in DRAIN_COLUMNS + TEMP_COLUMNS if c in df.columns]
    if climate_cols and len(climate_cols) != 24:
        raise BaselineError("climate columns must include all of q01..q12 and t01..t12")
    df = df.copy()
    for col in df.columns:
        if col in TEXT_COLUMNS:
            df[col] = df[col].astype(str)
            continue
        try:
            # numpy parses decimal strings exactly; pandas' fast parser can be off by an ulp
            df[col] = np.asarray(df[col], dtype=float)
        except (TypeError, ValueError):
            bad = pd.to_numeric(df[col], errors="coerce").isna()
            ids = df.loc[bad, "cell_id"].tolist()[:MAX_REPORTED]
            raise BaselineError(f"non-numeric values in column {col!r} (cell_id: {ids})") from None
        if df[col].isna().any():
            ids = df.loc[df[col].isna(), "cell_id"].tolist()[:MAX_REPORTED]
            raise BaselineError(f"non-numeric values in column {col!r} (cell_id: {ids})")
    df["cell_id"] = df["cell_id"].astype(np.int64)
    df["in_mississippi_basin"] = df["in_mississippi_basin"].astype(np.int64)
    problems = _violations(df)
    if problems:
        lines = [f"cell {cid}: {col}: {msg}" for cid, col, msg in problems[:MAX_REPORTED]]
        raise BaselineError(f"{len(problems)} invariant violation(s):\n  " + "\n  ".join(lines))
    order = df.practice.map({IRRIGATED: 0, RAINFED: 1})
    df = df.assign(_order=order).sort_values(["cell_id", "_order"], kind="stable").drop(columns="_order")
    return df.reset_index(drop=True)[[c for c in COLUMNS if c in df.columns]]


def load_baseline(path, params: MarketParams | None = None, climate_path=None) -> BaselineEconomy:
    """Read a baseline table; an optional per-cell climate file is merged on cell_id."""
    path = Path(path)
    if not path.exists():
        raise BaselineError(f"baseline file not found: {path}")
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, na_values=[""])
    except pd.errors.EmptyDataError:
        raise BaselineError("no cells") from None
    if climate_path is not None:
        clim = pd.read_csv(climate_path, dtype=str)
        need = ["cell_id"] + DRAIN_COLUMNS + TEMP_COLUMNS
        missing = [c for c in need if c not in clim.columns]
        if missing:
            raise BaselineError(f"climate file missing columns: {missing}")
        df = df.drop(columns=[c for c in DRAIN_COLUMNS + TEMP_COLUMNS if c in df.columns])
        df = df.merge(clim[need], on="cell_id", how="left")
    table = validate_table(df)
    return BaselineEconomy(table, params or MarketParams())


def write_baseline(economy: BaselineEconomy, path) -> Path:
    """Write the baseline table; floats use shortest round-trip repr."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    economy.table.to_csv(path, index=False, float_format=None, lineterminator="\n")
    return path


# --------------------------------------------------------------------------- synthetic data

CELL_HECTARES = 6500.0  # ~5 arc-minute cell in the US Midwest
DEGREES_PER_CELL = 1.0 / 12.0
CENTER_LON, CENTER_LAT = -90.5, 41.5
DRAIN_SHAPE = np.array([0.5, 0.7, 1.3, 1.9, 2.0, 1.5, 0.6, 0.3, 0.3, 0.4, 0.7, 0.8])


def _ramp(d, inner, outer):
    """1 inside ``inner``, 0 beyond ``outer``, linear between."""
    return np.clip((outer - d) / (outer - inner), 0.0, 1.0)


def generate_synthetic(n_cells: int, seed: int, params: MarketParams | None = None) -> BaselineEconomy:
    """Seeded synthetic baseline laid out on a square 5-arc-minute grid.

    The centre of the grid is a Corn Belt analog (heavy tile drainage, CD and
    wetland suitability, low land/N substitutability); the outer ring is a
    fringe with no BMP suitability and leakier soils.
    """
    if not isinstance(n_cells, (int, np.integer)) or n_cells < 2:
        raise ValueError(f"n_cells must be an integer >= 2, got {n_cells}")
    rng = np.random.default_rng(seed)
    n = int(n_cells)
    side = math.ceil(math.sqrt(n))
    idx = np.arange(n)
    row, col = idx // side, idx % side
    lon = CENTER_LON + (col + 0.5 - side / 2) * DEGREES_PER_CELL
    lat = CENTER_LAT + (row + 0.5 - side / 2) * DEGREES_PER_CELL
    dx = (col + 0.5) / side * 2 - 1
    dy = (row + 0.5) / side * 2 - 1
    dist = np.hypot(dx, dy)
    core = _ramp(dist, 0.4, 0.75)
    wet_zone = _ramp(dist, 0.55, 0.95)
    state_idx = (row * 4 // side) * 4 + col * 4 // side
    state = np.array([f"ST{k + 1:02d}" for k in state_idx])
    in_basin = (dx < 0.6).astype(np.int64)

    tile = np.where(core > 0, np.clip(0.85 * core + rng.normal(0, 0.05, n), 0, 1), 0.0)
    cd = tile * rng.uniform(0.5, 0.9, n)
    wetland = np.where(wet_zone > 0, np.clip(0.4 * wet_zone + rng.normal(0, 0.03, n), 0, 1), 0.0) * in_basin

    crop_area = CELL_HECTARES * np.clip(0.15 + 0.6 * core + rng.normal(0, 0.05, n), 0.05, 0.9)
    west = dx < -0.5
    irr_share = np.where(west, rng.uniform(0.3, 0.5, n), rng.uniform(0.02, 0.08, n))
    irr_share = np.where(~west & (rng.uniform(size=n) < 0.3), 0.0, irr_share)
    area = {IRRIGATED: crop_area * irr_share, RAINFED: crop_area * (1 - irr_share)}

    annual_mm = np.clip(120 + 180 * core + rng.normal(0, 20, n), 40, None)
    shape = DRAIN_SHAPE / DRAIN_SHAPE.mean()
    drain = (annual_mm / 1000 / 365)[:, None] * shape[None, :] * rng.uniform(0.9, 1.1, (n, 12))
    t_mean = 10 - 0.8 * (lat - CENTER_LAT)
    month = np.arange(12)
    temp = t_mean[:, None] - 14 * np.cos(2 * np.pi * month / 12)[None, :] + rng.normal(0, 0.5, (n, 12))

    frames = []
    for practice in PRACTICES:
        irrigated = practice == IRRIGATED
        n_rate = np.clip(rng.normal(185 if irrigated else 165, 20, n) + 10 * core, 80, 260)
        a = 11000 * rng.lognormal(0.0, 0.08, n) * (1.05 if irrigated else 1.0)
        c_hi = 0.99 if irrigated else 0.988
        c_lo = 0.982 if irrigated else 0.97
        c = np.clip(rng.uniform(c_lo, c_hi, n) - 0.01 * core, 0.95, 0.99)
        k = n_rate * -np.log(c)
        u0 = rng.uniform(0.15, 0.5, n) / k
        b = u0 / np.power(c, n_rate)
        y0 = a * np.exp(-u0)
        theta_mean = (0.28 if irrigated else 0.36) + 0.06 * (1 - core)
        theta0 = np.clip(rng.normal(theta_mean, 0.06), 0.05, 0.6)
        convex = rng.uniform(0.3, 0.7, n)
        beta = convex * theta0 / n_rate
        alpha = (1 - convex) * theta0
        frames.append(pd.DataFrame({
            "cell_id": idx.astype(np.int64), "practice": practice,
            "lon": lon, "lat": lat, "state_code": state, "region_code": "US",
            "tile_drained_fraction": tile, "cd_suitable_fraction": cd,
            "wetland_suitable_fraction": wetland, "in_mississippi_basin": in_basin,
            "crop_area": area[practice], "n_rate": n_rate, "baseline_yield": y0,
            "a": a, "b": b, "c": c, "alpha": alpha, "beta": beta, "n_max": 1.8 * n_rate,
            **{name: drain[:, m] for m, name in enumerate(DRAIN_COLUMNS)},
            **{name: temp[:, m] for m, name in enumerate(TEMP_COLUMNS)},
        }))
    table = validate_table(pd.concat(frames, ignore_index=True))
    return BaselineEconomy(table, params or MarketParams())
