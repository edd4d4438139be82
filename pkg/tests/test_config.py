import math
import re
from pathlib import Path

import pytest

from nleach.config import DEFAULT_SCENARIOS, ConfigError, default_config, load_config, parse_config, tomllib

FULL = """
[market]
crop_price = 30.0
n_supply_elasticity = "inf"
land_supply_elasticity = 0.0

[solver]
tol = 1e-9
max_iter = 50
threads = 2

[bmp]
cdr = [40.0, 60.0, 50.0, 80.0]
n_tanks = 3
theta = 1.05
k_den = 0.12
f_w = 0.01

[[scenario]]
label = "tax"
policy = "tax"
rate = 120.0

[[scenario]]
label = "wet"
policy = "wetland"
variant = "D*"
adoption = 0.5
farmer_share = 0.25
cost_per_ha = 8.0
land_take_ratio = 0.03

[[scenario]]
label = "both"
policy = "combine"
of = ["tax", "wet"]
"""


def test_full_config(tmp_path, small_cal):
    path = tmp_path / "c.toml"
    path.write_text(FULL)
    cfg = load_config(path)
    assert cfg.market.crop_price == 30.0 and math.isinf(cfg.market.n_supply_elasticity)
    assert cfg.solver.max_iter == 50 and cfg.solver.threads == 2
    assert cfg.bmp.cdr.ratios == (40.0, 60.0, 50.0, 80.0) and cfg.bmp.wetland.n_tanks == 3
    s = cfg.build_scenarios(small_cal)
    assert s["tax"].tax_rate == 120.0
    assert s["wet"].wetland.land_take_ratio == 0.03 and s["wet"].wetland.variant == "D*"
    assert s["both"].components == ("A", "D*") and s["both"].label == "both"
    assert len(cfg.digest) == 64


def test_defaults(small_cal):
    cfg = default_config()
    assert cfg.scenarios == DEFAULT_SCENARIOS
    built = cfg.build_scenarios(small_cal)
    assert list(built) == ["null", "A", "B", "C", "D", "D*", "A+B+D", "A+B+D*"]
    assert built["A+B+D*"].components == ("A", "B", "D*")
    assert default_config().digest == cfg.digest


@pytest.mark.parametrize("text,key", [
    ("[markets]\n", "markets"),
    ("[market]\ncrop_prise = 1.0\n", "crop_prise"),
    ("[solver]\ntolerance = 1e-8\n", "tolerance"),
    ("[bmp]\nkden = 0.1\n", "kden"),
    ('[[scenario]]\nlabel = "x"\npolicy = "cd"\nadopt = 0.5\n', "adopt"),
    ('[[scenario]]\nlabel = "x"\npolicy = "subsidy"\n', "subsidy"),
])
def test_unknown_keys_are_named(text, key):
    with pytest.raises(ConfigError, match=re.escape(key)):
        parse_config(tomllib.loads(text))


@pytest.mark.parametrize("text", [
    '[market]\ncrop_price = "high"\n',
    "[market]\ndemand_elasticity = 0.5\n",
    "[solver]\nmax_iter = 0\n",
    "[bmp]\ncdr = [1.0, 2.0]\n",
    "[bmp]\ntheta = 1.2\n",
    '[[scenario]]\npolicy = "null"\n',
    '[[scenario]]\nlabel = "a"\npolicy = "null"\n[[scenario]]\nlabel = "a"\npolicy = "null"\n',
    '[[scenario]]\nlabel = "c"\npolicy = "combine"\nof = "A"\n',
])
def test_invalid_values(text):
    with pytest.raises(ConfigError):
        parse_config(tomllib.loads(text))


def test_build_errors(small_cal):
    cfg = parse_config(tomllib.loads('[[scenario]]\nlabel = "c"\npolicy = "combine"\nof = ["nope"]\n'))
    with pytest.raises(ConfigError, match="nope"):
        cfg.build_scenarios(small_cal)
    cfg = parse_config(tomllib.loads('[[scenario]]\nlabel = "d"\npolicy = "wetland"\nvariant = "E"\n'))
    with pytest.raises(ConfigError, match="variant"):
        cfg.build_scenarios(small_cal)
    both = ('[[scenario]]\nlabel = "d"\npolicy = "wetland"\n[[scenario]]\nlabel = "ds"\npolicy = "wetland"\n'
            'variant = "D*"\n[[scenario]]\nlabel = "x"\npolicy = "combine"\nof = ["d", "ds"]\n')
    with pytest.raises(ConfigError, match="incompatible"):
        parse_config(tomllib.loads(both)).build_scenarios(small_cal)


def test_unreadable_and_malformed(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[market\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_every_documented_key_is_accepted():
    doc = (Path(__file__).parents[1] / "docs" / "scenarios.md").read_text()
    from dataclasses import fields
    from nleach.config import BMP_KEYS, POLICY_KEYS, SOLVER_KEYS
    from nleach.grid_data import MarketParams
    documented = set(re.findall(r"^\| `(\w+)` \|", doc, re.M))
    assert {f.name for f in fields(MarketParams)} <= documented
    assert SOLVER_KEYS <= documented and BMP_KEYS <= documented
    for policy, keys in POLICY_KEYS.items():
        assert f"`{policy}`" in doc
        for k in keys:
            assert f"`{k}`" in doc
