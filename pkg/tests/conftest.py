import math
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nleach.calibration import calibrate  # noqa: E402
from nleach.equilibrium import solve  # noqa: E402
from nleach.grid_data import MarketParams, generate_synthetic  # noqa: E402
from nleach import scenarios as S  # noqa: E402

DEFAULT_CELLS, DEFAULT_SEED = 10000, 7
TIMINGS = {}  # seconds spent building the session fixtures on the default grid
ACCEPTANCE = []  # (criterion, passed, detail) lines reported at the end of the session


@pytest.fixture(scope="session")
def small_cal():
    return calibrate(generate_synthetic(60, 3))


@pytest.fixture(scope="session")
def fixed_nonland_params():
    return MarketParams(nonland_supply_elasticity=math.inf)


@pytest.fixture(scope="session")
def default_cal():
    t0 = time.perf_counter()
    cal = calibrate(generate_synthetic(DEFAULT_CELLS, DEFAULT_SEED))
    TIMINGS["calibrate"] = time.perf_counter() - t0
    return cal


@pytest.fixture(scope="session")
def default_runs(default_cal):
    """Solutions of the policy set on the default grid, keyed by label."""
    t0 = time.perf_counter()
    cal = default_cal
    a, b, c = S.scenario_A(cal, 28.9), S.scenario_B(0.10), S.scenario_C()
    d, ds = S.scenario_D("D"), S.scenario_D("D*")
    scns = [S.NULL, a, b, c, d, ds, S.combine([a, b, d]), S.combine([a, b, ds])]
    runs = {s.label: solve(cal, s) for s in scns}
    TIMINGS["solve"] = time.perf_counter() - t0
    return runs


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
