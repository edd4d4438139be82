"""Command line: ``nleach generate | run | analyze | calibrate-tax | validate``.

Exit codes: 0 success, 2 configuration error, 3 non-convergence, 4 data error.
Relative ``--out`` defaults live under ``$NLEACH_OUTPUT_ROOT`` (else ``./output``).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from contextlib import contextmanager
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from . import analysis as an
from .calibration import CalibrationError, calibrate
from .config import ConfigError, RunConfig, default_config, load_config
from .equilibrium import ClosureError, ConvergenceError, solve, target_price_closure
from .grid_data import BaselineError, generate_synthetic, load_baseline, write_baseline
from .scenarios import NULL, ScenarioError, TaxCalibrationError, baseline_cost_wedge, calibrate_tax

logger = logging.getLogger("nleach")

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_DATA = 0, 2, 3, 4
BASELINE_FILE = "baseline.csv"
MANIFEST = "manifest.json"


class DataError(RuntimeError):
    pass


def output_root() -> Path:
    return Path(os.environ.get("NLEACH_OUTPUT_ROOT") or "output")


def _out(arg, default: str) -> Path:
    return Path(arg) if arg else output_root() / default


def slug(label: str) -> str:
    return label.replace("*", "star").replace("/", "_").replace(" ", "_")


class Timer:
    def __init__(self):
        self.phases = {}

    @contextmanager
    def phase(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.phases[name] = self.phases.get(name, 0.0) + time.perf_counter() - t0


def _json(obj, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, Path):
        return str(v)
    return str(v)


def write_manifest(out_dir: Path, *, command: str, config_digest: str, seed, labels, solver, timer: Timer,
                   extra: dict | None = None):
    manifest = {
        "tool": "nleach",
        "version": __version__,
        "command": command,
        "config_digest": config_digest,
        "seed": seed,
        "scenario_labels": list(labels),
        "solver": solver,
        "timings_seconds": {k: round(v, 6) for k, v in timer.phases.items()},
    }
    manifest.update(extra or {})
    _json(manifest, out_dir / MANIFEST)


def _file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _baseline_seed(baseline: Path):
    m = baseline.parent / MANIFEST
    if m.exists():
        try:
            return json.loads(m.read_text()).get("seed")
        except json.JSONDecodeError:
            return None
    return None


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else default_config()
    if getattr(args, "threads", None):
        cfg = replace(cfg, solver=replace(cfg.solver, threads=args.threads))
    return cfg


def _load(args, cfg: RunConfig):
    path = Path(args.baseline) if args.baseline else output_root() / "baseline" / BASELINE_FILE
    economy = load_baseline(path, cfg.market, getattr(args, "climate", None))
    return path, economy


# --------------------------------------------------------------------------- commands

def cmd_generate(args) -> int:
    timer = Timer()
    out = _out(args.out, "baseline")
    with timer.phase("generate"):
        economy = generate_synthetic(args.cells, args.seed)
    with timer.phase("write"):
        write_baseline(economy, out / BASELINE_FILE)
    write_manifest(out, command="generate", config_digest="", seed=args.seed, labels=[], solver={},
                   timer=timer, extra={"n_cells": args.cells, "baseline_sha256": _file_digest(out / BASELINE_FILE)})
    print(f"wrote {economy.n_cells} cells to {out / BASELINE_FILE}")
    return EXIT_OK


def _cells_table(report: an.MitigationReport, solution) -> pd.DataFrame:
    c = report.cells.copy()
    for q in an.LEVELS:
        c[q] = an.quantize(solution.cells[q].to_numpy(float))
    for k in ("n_rate", "leach_multiplier", "wetland_share", "cd_share"):
        c[k] = solution.cells[k].to_numpy()
    return c


def _prices_table(solution) -> pd.DataFrame:
    p = solution.prices
    rows = [("crop", p.crop_price), ("n", p.n_price)]
    regions = solution.cells.region_code.drop_duplicates().sort_values().tolist()
    rows += [(f"nonland:{r}", v) for r, v in zip(regions, np.atleast_1d(p.nonland_price))]
    return pd.DataFrame({"market": [r[0] for r in rows], "price": [r[1] for r in rows],
                         "real_price": [r[1] / p.numeraire for r in rows],
                         "residual": [solution.residuals.get(r[0], 0.0) for r in rows]})


def _write_solution(out: Path, base, solution, write_figure=True):
    report = an.MitigationReport.from_solutions(base, solution)
    an.write_table(_cells_table(report, solution), out / "cells.csv")
    units = solution.units.assign(land_rent=solution.prices.land_rent, water_rent=solution.prices.water_rent)
    an.write_table(units, out / "units.csv")
    an.write_table(_prices_table(solution), out / "prices.csv")
    an.write_table(an.state_aggregate(report), out / "states.csv")
    an.write_ascii_grid(report.cells.lon, report.cells.lat, report.cells.d_leaching, out / "d_leaching.asc")
    diag = {k: v for k, v in solution.diagnostics.items() if k not in ("seconds", "evaluations")}
    _json({"label": solution.label, "national": report.national(), "diagnostics": diag,
           "tax_rate": solution.scenario.tax_rate}, out / "summary.json")
    if write_figure:
        from .plotting import leaching_change_map
        leaching_change_map(report, out / "leaching_change.png")
    return report


def cmd_run(args) -> int:
    timer = Timer()
    with timer.phase("load"):
        cfg = _config(args)
        path, economy = _load(args, cfg)
    with timer.phase("calibrate"):
        cal = calibrate(economy)
    with timer.phase("scenarios"):
        scenarios = cfg.build_scenarios(cal)
    wanted = args.scenario or list(scenarios)
    missing = [w for w in wanted if w not in scenarios]
    if missing:
        raise ConfigError(f"unknown scenario label(s): {missing} (known: {list(scenarios)})")
    out_root = _out(args.out, "runs")
    seed = _baseline_seed(path)
    solver = asdict(cfg.solver)
    with timer.phase("solve:null"):
        base = solve(cal, NULL, cfg.solver, cfg.bmp)
    failed = []
    for label in wanted:
        t = Timer()
        t.phases.update({k: v for k, v in timer.phases.items()})
        out = out_root / slug(label)
        try:
            with t.phase("solve"):
                sol = base if scenarios[label].is_null else solve(cal, scenarios[label], cfg.solver, cfg.bmp)
        except ConvergenceError as exc:
            failed.append(label)
            _json({"label": label, "error": str(exc), "diagnostics": exc.diagnostics}, out / "diagnostics.json")
            write_manifest(out, command="run", config_digest=cfg.digest, seed=seed, labels=[label],
                           solver=solver, timer=t, extra={"converged": False})
            logger.error("scenario %s did not converge: %s", label, exc)
            continue
        with t.phase("write"):
            _write_solution(out, base, sol, not args.no_figures)
        write_manifest(out, command="run", config_digest=cfg.digest, seed=seed, labels=[label], solver=solver,
                       timer=t, extra={"converged": True, "baseline": str(path),
                                       "baseline_sha256": _file_digest(path), "tax_rate": sol.scenario.tax_rate})
        d = sol.totals
        print(f"{label:>8}: leaching {100 * (d['leaching'] / base.totals['leaching'] - 1):+.3f}%  "
              f"N use {100 * (d['n_use'] / base.totals['n_use'] - 1):+.3f}%  "
              f"output {100 * (d['output'] / base.totals['output'] - 1):+.3f}%  -> {out}")
    return EXIT_CONVERGENCE if failed else EXIT_OK


def _read_result(d: Path):
    if not (d / MANIFEST).exists():
        raise DataError(f"{d} has no {MANIFEST}; not a result directory")
    if not (d / "cells.csv").exists():
        raise DataError(f"{d} has no cells.csv (did the run converge?)")
    manifest = json.loads((d / MANIFEST).read_text())
    cells = pd.read_csv(d / "cells.csv", dtype={"state_code": str})
    label = manifest["scenario_labels"][0]
    keep = ["cell_id", "state_code", "lon", "lat"] + [f"{p}_{q}" for q in an.LEVELS for p in ("base", "d")]
    return manifest, an.MitigationReport(label, cells[keep])


def cmd_analyze(args) -> int:
    timer = Timer()
    from . import plotting as pl
    with timer.phase("load"):
        loaded = [_read_result(Path(d)) for d in args.result_dirs]
    reports = [r for _, r in loaded]
    try:
        if reports:
            an._check_grid(reports)
    except an.GridMismatchError as exc:
        raise DataError(str(exc)) from None
    seeds = {m.get("seed") for m, _ in loaded}
    if len(seeds) > 1:
        raise DataError(f"runs come from different seeds: {sorted(map(str, seeds))}")
    out = _out(args.out, "analysis")
    with timer.phase("analyze"):
        reports = [r for r in reports if r.label != "null"]
        singles = [r for r in reports if r.label in ("A", "B", "C", "D")]
        if len(singles) >= 2:
            best = an.best_policy_map(singles)
            an.write_table(best, out / "best_policy.csv")
            codes = {p: i for i, p in enumerate((*an.POLICY_ORDER, an.NO_POLICY))}
            an.write_ascii_grid(best.lon, best.lat, best.best_policy.map(codes), out / "best_policy.asc")
            if not args.no_figures:
                pl.best_policy_figure(best, out / "best_policy.png")
        states = {}
        for r in reports:
            s = an.state_aggregate(r)
            states[r.label] = s
        if states:
            an.write_table(pd.concat([s.assign(scenario=k) for k, s in states.items()], ignore_index=True)
                           [["scenario"] + list(next(iter(states.values())).columns)], out / "states.csv")
        curves, halves = {}, []
        for r in reports:
            try:
                cur = an.cumulative_curve(r)
            except an.NoReductionError:
                logger.warning("scenario %s reduces leaching nowhere; no cumulative curve", r.label)
                continue
            curves[r.label] = cur
            an.write_table(cur.table, out / f"cumulative_{slug(r.label)}.csv")
            halves.append({"scenario": r.label, "pct_cells_for_half": cur.half_point})
        if halves:
            an.write_table(pd.DataFrame(halves), out / "cumulative_summary.csv")
        ratio = an.reduction_ratio_table(reports)
        an.write_table(ratio, out / "reduction_ratio.csv")
        national = pd.DataFrame([{"scenario": r.label, **r.national()} for r in reports])
        an.write_table(national, out / "national.csv")
    if not args.no_figures:
        with timer.phase("figures"):
            if states:
                pl.state_reduction_figure(states, out / "state_reduction.png")
            if curves:
                pl.cumulative_figure(curves, out / "cumulative.png")
            if len(ratio):
                pl.ratio_figure(ratio, out / "reduction_ratio.png")
    write_manifest(out, command="analyze", config_digest="", seed=seeds.pop() if seeds else None,
                   labels=[r.label for r in reports], solver={}, timer=timer,
                   extra={"inputs": [str(d) for d in args.result_dirs]})
    print(f"analysis of {len(reports)} run(s) written to {out}")
    return EXIT_OK


def cmd_calibrate_tax(args) -> int:
    cfg = _config(args)
    _, economy = _load(args, cfg)
    cal = calibrate(economy)
    rate = calibrate_tax(cal, args.target, args.weighting)
    wedge = baseline_cost_wedge(cal, rate, args.weighting)
    result = {"target_cost_increase": args.target, "weighting": args.weighting, "tax_rate": rate,
              "achieved_cost_increase": wedge}
    print(json.dumps(result, indent=2, sort_keys=True))
    if args.out:
        _json(result, Path(args.out))
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _config(args)
    _, economy = _load(args, cfg)
    cal = calibrate(economy)
    p0 = cfg.market.crop_price
    if args.target_price is not None:
        target = args.target_price
    else:
        target = p0 * (1 + args.target_change / 100.0)
    res = target_price_closure(cal, target, opts=cfg.solver, bmp=cfg.bmp)
    result = {"target_price": target, "baseline_price": p0, "productivity_shift": res.shift,
              "solved_price": res.solution.prices.crop_price / res.solution.prices.numeraire,
              "pct_change": res.quantity_changes}
    print(json.dumps(result, indent=2, sort_keys=True))
    if args.out:
        _json(result, Path(args.out))
    return EXIT_OK


# --------------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nleach", description="Nitrogen-leaching policy simulator.")
    p.add_argument("--version", action="version", version=f"nleach {__version__}")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded synthetic baseline")
    g.add_argument("--cells", type=int, default=10000)
    g.add_argument("--seed", type=int, default=7)
    g.add_argument("--out", help="output directory (default <root>/baseline)")
    g.set_defaults(func=cmd_generate)

    def data_args(sp):
        sp.add_argument("--baseline", help="baseline table (default <root>/baseline/baseline.csv)")
        sp.add_argument("--climate", help="optional per-cell monthly climate table")
        sp.add_argument("--config", help="TOML run configuration")

    r = sub.add_parser("run", help="solve scenarios and write result directories")
    data_args(r)
    r.add_argument("--scenario", action="append", help="scenario label to run (repeatable; default all)")
    r.add_argument("--out", help="output directory (default <root>/runs)")
    r.add_argument("--threads", type=int, default=None)
    r.add_argument("--no-figures", action="store_true")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="best-policy map, state tables, cumulative curves, ratios")
    a.add_argument("result_dirs", nargs="+")
    a.add_argument("--out", help="output directory (default <root>/analysis)")
    a.add_argument("--no-figures", action="store_true")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("calibrate-tax", help="leaching tax rate for a target average N cost increase")
    data_args(t)
    t.add_argument("--target", type=float, default=28.9, help="percent increase of the average N cost")
    t.add_argument("--weighting", default="n_use", choices=["n_use", "leaching", "cells"])
    t.add_argument("--out", help="write the result as JSON")
    t.set_defaults(func=cmd_calibrate_tax)

    v = sub.add_parser("validate", help="productivity shift reproducing a target crop price")
    data_args(v)
    grp = v.add_mutually_exclusive_group(required=True)
    grp.add_argument("--target-price", type=float)
    grp.add_argument("--target-change", type=float, help="percent change from the baseline price")
    v.add_argument("--out", help="write the result as JSON")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, ScenarioError) as exc:
        if isinstance(exc, TaxCalibrationError):
            print(f"error: tax calibration failed: {exc}", file=sys.stderr)
            return EXIT_CONVERGENCE
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ClosureError) as exc:
        print(f"error: no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (BaselineError, CalibrationError, DataError, an.GridMismatchError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
