"""Reporting products built from solved scenarios.

Per-cell changes are rounded to multiples of 2**-20 tons before anything is
summed. Sums of such values are exact in double precision (for totals below
~8e9 tons), so state totals add up to the national total bit for bit and no
result depends on summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

QUANTUM = 2.0 ** -20
POLICY_ORDER = ("A", "B", "C", "D", "D*")
NO_POLICY = "none"
ZERO_N_CHANGE = 1e-9  # percent; below this the reduction ratio is undefined
FLOAT_FORMAT = "%.17g"  # raster cells; tables use shortest round-trip repr
LEVELS = ("leaching", "n_use", "output", "land")


class GridMismatchError(ValueError):
    pass


class NoReductionError(ValueError):
    pass


def quantize(x):
    return np.round(np.asarray(x, dtype=float) / QUANTUM) * QUANTUM


def exact_sum(x) -> float:
    return math.fsum(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class MitigationReport:
    """Per-cell baseline levels and changes for one scenario.

    ``cells`` has ``cell_id, state_code, lon, lat`` plus ``base_<q>`` and
    ``d_<q>`` for q in leaching, n_use, output, land (tons, tons, tons, ha).
    Negative ``d_leaching`` is a reduction.
    """

    label: str
    cells: pd.DataFrame

    @classmethod
    def from_frames(cls, label: str, base: pd.DataFrame, post: pd.DataFrame) -> "MitigationReport":
        if len(base) != len(post) or not np.array_equal(base.cell_id.to_numpy(), post.cell_id.to_numpy()):
            raise GridMismatchError(f"scenario {label!r} is not on the baseline grid")
        out = base[["cell_id", "state_code", "lon", "lat"]].reset_index(drop=True).copy()
        for q in LEVELS:
            b = quantize(base[q].to_numpy(float))
            out[f"base_{q}"] = b
            out[f"d_{q}"] = quantize(post[q].to_numpy(float)) - b
        return cls(label, out)

    @classmethod
    def from_solutions(cls, base, solution) -> "MitigationReport":
        return cls.from_frames(solution.label, base.cells, solution.cells)

    @property
    def reduction(self) -> np.ndarray:
        return -self.cells.d_leaching.to_numpy()

    def national(self) -> dict:
        out = {}
        for q in LEVELS:
            b, d = exact_sum(self.cells[f"base_{q}"]), exact_sum(self.cells[f"d_{q}"])
            out[f"base_{q}"], out[f"d_{q}"] = b, d
            out[f"pct_{q}"] = 100.0 * d / b if b else float("nan")
        return out


def _check_grid(reports):
    ref = reports[0].cells.cell_id.to_numpy()
    for r in reports[1:]:
        if not np.array_equal(ref, r.cells.cell_id.to_numpy()):
            raise GridMismatchError(f"reports {reports[0].label!r} and {r.label!r} cover different grids")


def _policy_rank(label: str):
    return (POLICY_ORDER.index(label), label) if label in POLICY_ORDER else (len(POLICY_ORDER), label)


def best_policy_map(reports) -> pd.DataFrame:
    """Per cell, the policy with the largest leaching reduction in tons.

    Ties go to the earlier policy in A < B < C < D < D* (other labels after,
    alphabetically). Cells no policy reduces get ``none``.
    """
    reports = sorted(reports, key=lambda r: _policy_rank(r.label))
    if not reports:
        raise ValueError("no reports given")
    _check_grid(reports)
    red = np.column_stack([r.reduction for r in reports])
    best = np.argmax(red, axis=1)  # first maximum wins, so the policy order breaks ties
    top = red[np.arange(len(red)), best]
    labels = np.array([r.label for r in reports], dtype=object)[best]
    labels[~(top > 0)] = NO_POLICY
    c = reports[0].cells
    return pd.DataFrame({"cell_id": c.cell_id, "state_code": c.state_code, "lon": c.lon, "lat": c.lat,
                         "best_policy": labels, "reduction": np.where(top > 0, top, 0.0)})


def state_aggregate(report: MitigationReport) -> pd.DataFrame:
    """Per-state sums and percent changes, largest leaching reduction first."""
    c = report.cells
    rows = []
    for state, g in c.groupby("state_code", sort=True):
        row = {"state_code": state, "cells": len(g)}
        for q in LEVELS:
            b, d = exact_sum(g[f"base_{q}"]), exact_sum(g[f"d_{q}"])
            row[f"base_{q}"], row[f"d_{q}"] = b, d
            row[f"pct_{q}"] = 100.0 * d / b if b else float("nan")
        rows.append(row)
    df = pd.DataFrame(rows)
    return df.sort_values(["d_leaching", "state_code"], kind="mergesort").reset_index(drop=True)


@dataclass(frozen=True, eq=False)
class CumulativeCurve:
    table: pd.DataFrame  # rank, cell_id, pct_cells, pct_reduction, cum_d_output
    half_point: float  # percent of cells delivering half the total reduction


def cumulative_curve(report: MitigationReport) -> CumulativeCurve:
    """Cumulative share of total reduction against share of cells, biggest reducers first.

    Cells that do not reduce leaching contribute nothing, so the curve is
    nondecreasing and concave and reaches 100%. Equal reductions are ordered
    by cell_id, which makes the result independent of input order.
    """
    c = report.cells
    red = np.maximum(report.reduction, 0.0)
    total = exact_sum(red)
    if not total > 0:
        raise NoReductionError(f"scenario {report.label!r} reduces leaching nowhere")
    order = np.lexsort((c.cell_id.to_numpy(), -red))
    red_sorted = red[order]
    cum = np.cumsum(red_sorted)  # exact: multiples of the quantum
    n = len(red)
    table = pd.DataFrame({
        "rank": np.arange(1, n + 1),
        "cell_id": c.cell_id.to_numpy()[order],
        "pct_cells": 100.0 * np.arange(1, n + 1) / n,
        "pct_reduction": 100.0 * cum / total,
        "cum_d_output": np.cumsum(c.d_output.to_numpy()[order]),
    })
    half = int(np.searchsorted(cum, 0.5 * total, side="left"))
    return CumulativeCurve(table, 100.0 * (half + 1) / n)


def reduction_ratio_table(reports) -> pd.DataFrame:
    """Per scenario and state: percent N-use change, percent leaching change and their ratio.

    States with zero baseline leaching are left out. When the N-use change is
    (numerically) zero the ratio is NaN and ``ratio_defined`` is False.
    """
    reports = list(reports)
    if reports:
        _check_grid(reports)
    frames = []
    for r in reports:
        s = state_aggregate(r)
        s = s[s.base_leaching > 0].sort_values("state_code", kind="mergesort")
        defined = s.pct_n_use.abs() > ZERO_N_CHANGE
        frames.append(pd.DataFrame({
            "scenario": r.label, "state_code": s.state_code, "pct_n_use": s.pct_n_use,
            "pct_leaching": s.pct_leaching,
            "ratio": np.where(defined, s.pct_leaching / s.pct_n_use.where(defined, 1.0), np.nan),
            "ratio_defined": defined,
        }))
    cols = ["scenario", "state_code", "pct_n_use", "pct_leaching", "ratio", "ratio_defined"]
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=cols)


# --------------------------------------------------------------------------- writers

def write_table(df: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, lineterminator="\n")
    return path


def grid_geometry(lon, lat):
    """Cell size and lower-left corner of the regular lon/lat lattice the cells sit on."""
    lon, lat = np.asarray(lon, dtype=float), np.asarray(lat, dtype=float)
    steps = np.diff(np.unique(np.round(np.concatenate([lon, lat]), 9)))
    steps = steps[steps > 1e-9]
    size = float(np.min(steps)) if len(steps) else 1.0
    return size, lon.min() - size / 2, lat.min() - size / 2


def write_ascii_grid(lon, lat, values, path, nodata: float = -9999.0) -> Path:
    """Write cell values as an ESRI ASCII grid (header then one row per latitude, north first)."""
    size, x0, y0 = grid_geometry(lon, lat)
    col = np.rint((np.asarray(lon) - x0 - size / 2) / size).astype(int)
    row_from_bottom = np.rint((np.asarray(lat) - y0 - size / 2) / size).astype(int)
    ncols, nrows = col.max() + 1, row_from_bottom.max() + 1
    grid = np.full((nrows, ncols), nodata)
    grid[nrows - 1 - row_from_bottom, col] = np.asarray(values, dtype=float)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"ncols {ncols}\nnrows {nrows}\nxllcorner {x0:.10g}\nyllcorner {y0:.10g}\n"
                 f"cellsize {size:.10g}\nNODATA_value {nodata:g}\n")
        for r in grid:
            fh.write(" ".join(FLOAT_FORMAT % v for v in r) + "\n")
    return path


def read_ascii_grid(path):
    """Inverse of :func:`write_ascii_grid`: ``(header dict, 2-D array)``."""
    with open(path) as fh:
        header = {}
        for _ in range(6):
            k, v = fh.readline().split()
            header[k.lower()] = float(v)
        data = np.loadtxt(fh, ndmin=2)
    return header, data


__all__ = [
    "MitigationReport", "CumulativeCurve", "GridMismatchError", "NoReductionError", "best_policy_map",
    "state_aggregate", "cumulative_curve", "reduction_ratio_table", "write_table", "write_ascii_grid",
    "read_ascii_grid", "quantize", "POLICY_ORDER", "NO_POLICY",
]
