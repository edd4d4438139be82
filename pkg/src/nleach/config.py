"""TOML run configuration: market parameters, solver options, BMP hydrology and scenarios.

Every key is documented in ``docs/scenarios.md``. Unknown keys are errors so
that typos never silently fall back to defaults.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .bmp import BmpSettings, CdrTable, WetlandParams
from .equilibrium import SolverOptions
from .grid_data import MarketParams
from .scenarios import (DEFAULT_CD_COST, DEFAULT_FARMER_SHARE, DEFAULT_WETLAND_COST, PolicyScenario,
                        ScenarioError, combine, scenario_A, scenario_B, scenario_C, scenario_D, scenario_tax)


class ConfigError(ValueError):
    pass


POLICY_KEYS = {
    "null": set(),
    "tax": {"target_cost_increase", "rate", "weighting"},
    "efficiency": {"gain"},
    "cd": {"adoption", "farmer_share", "cost_per_ha"},
    "wetland": {"variant", "adoption", "farmer_share", "cost_per_ha", "land_take_ratio"},
    "productivity": {"shift"},
    "combine": {"of"},
}
TOP_KEYS = {"market", "solver", "bmp", "scenario"}
SOLVER_KEYS = {f.name for f in fields(SolverOptions)}
BMP_KEYS = {"cdr", "n_tanks", "theta", "k_den", "f_w"}


@dataclass(frozen=True)
class ScenarioSpec:
    """One ``[[scenario]]`` block, kept declarative until a calibrated economy is at hand."""

    label: str
    policy: str
    options: dict = field(default_factory=dict)

    def build(self, cal, known: dict) -> PolicyScenario:
        o = self.options
        try:
            if self.policy == "null":
                return PolicyScenario(label=self.label)
            if self.policy == "tax":
                if "rate" in o:
                    return scenario_tax(float(o["rate"]), label=self.label)
                return scenario_A(cal, float(o.get("target_cost_increase", 28.9)),
                                  o.get("weighting", "n_use"), label=self.label)
            if self.policy == "efficiency":
                return scenario_B(float(o.get("gain", 0.10)), label=self.label)
            if self.policy == "cd":
                return scenario_C(float(o.get("adoption", 1.0)),
                                  float(o.get("farmer_share", DEFAULT_FARMER_SHARE)),
                                  float(o.get("cost_per_ha", DEFAULT_CD_COST)), label=self.label)
            if self.policy == "wetland":
                s = scenario_D(o.get("variant", "D"), float(o.get("adoption", 1.0)),
                               float(o.get("farmer_share", DEFAULT_FARMER_SHARE)),
                               float(o.get("cost_per_ha", DEFAULT_WETLAND_COST)), label=self.label)
                if "land_take_ratio" in o:
                    s = replace(s, wetland=replace(s.wetland, land_take_ratio=float(o["land_take_ratio"])))
                return s
            if self.policy == "productivity":
                return PolicyScenario(label=self.label, productivity_shift=float(o.get("shift", 0.0)))
            if self.policy == "combine":
                parts = []
                for name in o["of"]:
                    if name not in known:
                        raise ConfigError(f"scenario {self.label!r}: 'of' names unknown scenario {name!r}")
                    parts.append(known[name])
                return combine(parts, label=self.label)
        except ScenarioError as exc:
            raise ConfigError(f"scenario {self.label!r}: {exc}") from None
        raise ConfigError(f"scenario {self.label!r}: unknown policy {self.policy!r}")


@dataclass(frozen=True)
class RunConfig:
    market: MarketParams = field(default_factory=MarketParams)
    solver: SolverOptions = field(default_factory=SolverOptions)
    bmp: BmpSettings = field(default_factory=BmpSettings)
    scenarios: tuple = ()
    digest: str = ""

    def build_scenarios(self, cal) -> dict:
        """Resolve every scenario in file order (combinations may refer to earlier blocks)."""
        out = {}
        for spec in self.scenarios:
            out[spec.label] = spec.build(cal, out)
        return out

    def as_dict(self) -> dict:
        return {
            "market": asdict(self.market),
            "solver": asdict(self.solver),
            "bmp": {"cdr": list(self.bmp.cdr.ratios), **asdict(self.bmp.wetland)},
            "scenarios": [{"label": s.label, "policy": s.policy, **s.options} for s in self.scenarios],
        }


DEFAULT_SCENARIOS = (
    ScenarioSpec("null", "null"),
    ScenarioSpec("A", "tax", {"target_cost_increase": 28.9}),
    ScenarioSpec("B", "efficiency", {"gain": 0.10}),
    ScenarioSpec("C", "cd"),
    ScenarioSpec("D", "wetland", {"variant": "D"}),
    ScenarioSpec("D*", "wetland", {"variant": "D*"}),
    ScenarioSpec("A+B+D", "combine", {"of": ["A", "B", "D"]}),
    ScenarioSpec("A+B+D*", "combine", {"of": ["A", "B", "D*"]}),
)


def _unknown(where: str, got, allowed):
    bad = sorted(set(got) - set(allowed))
    if bad:
        raise ConfigError(f"{where}: unknown key {bad[0]!r} (allowed: {', '.join(sorted(allowed)) or 'none'})")


def _float_or_inf(v, key):
    if isinstance(v, str) and v.lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"[market] {key}: expected a number, got {v!r}")
    return float(v)


def parse_config(data: dict, digest: str = "") -> RunConfig:
    _unknown("top level", data, TOP_KEYS)
    market_raw = data.get("market", {})
    _unknown("[market]", market_raw, {f.name for f in fields(MarketParams)})
    try:
        market = MarketParams(**{k: _float_or_inf(v, k) for k, v in market_raw.items()})
    except ValueError as exc:
        raise ConfigError(f"[market] {exc}") from None

    solver_raw = data.get("solver", {})
    _unknown("[solver]", solver_raw, SOLVER_KEYS)
    try:
        solver = SolverOptions(**solver_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[solver] {exc}") from None

    bmp_raw = data.get("bmp", {})
    _unknown("[bmp]", bmp_raw, BMP_KEYS)
    try:
        cdr = CdrTable(tuple(bmp_raw["cdr"])) if "cdr" in bmp_raw else CdrTable()
        wet = WetlandParams(**{k: v for k, v in bmp_raw.items() if k != "cdr"})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[bmp] {exc}") from None

    specs = []
    seen = set()
    for i, block in enumerate(data.get("scenario", []), start=1):
        where = f"[[scenario]] #{i}"
        if "label" not in block or "policy" not in block:
            raise ConfigError(f"{where}: 'label' and 'policy' are required")
        label, policy = str(block["label"]), block["policy"]
        where = f"[[scenario]] #{i} ({label!r})"
        if policy not in POLICY_KEYS:
            raise ConfigError(f"{where}: unknown policy {policy!r} (allowed: {', '.join(sorted(POLICY_KEYS))})")
        opts = {k: v for k, v in block.items() if k not in ("label", "policy")}
        _unknown(where, opts, POLICY_KEYS[policy])
        if policy == "combine" and not isinstance(opts.get("of"), list):
            raise ConfigError(f"{where}: 'of' must list earlier scenario labels")
        if label in seen:
            raise ConfigError(f"{where}: duplicate label")
        seen.add(label)
        specs.append(ScenarioSpec(label, policy, opts))
    return RunConfig(market, solver, BmpSettings(cdr, wet), tuple(specs) or DEFAULT_SCENARIOS, digest)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data, hashlib.sha256(raw).hexdigest())


def default_config() -> RunConfig:
    cfg = RunConfig(scenarios=DEFAULT_SCENARIOS)
    digest = hashlib.sha256(json.dumps(cfg.as_dict(), sort_keys=True, default=str).encode()).hexdigest()
    return RunConfig(scenarios=DEFAULT_SCENARIOS, digest=digest)


__all__ = ["ConfigError", "RunConfig", "ScenarioSpec", "parse_config", "load_config", "default_config",
           "DEFAULT_SCENARIOS"]
