import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nleach.bmp import (CD, WETLAND_D, WETLAND_D_STAR, CdrTable, MonthlyClimate, NoDrainageError, WetlandParams,
                        cd_load_adjustment, effective_cell_load_multiplier, hydraulic_loading_rate,
                        tanks_in_series_fraction, treated_fraction, wetland_load_adjustment,
                        wetland_rate_constant)
from nleach.grid_data import GridCell

WARM = (20.0,) * 12


def climate(q, t=WARM):
    return MonthlyClimate(tuple(q), tuple(t))


def cell(tile=0.5, cd=0.4, wet=0.3, clim=None):
    return GridCell(1, -90, 41, "S", "US", 0, 100, 0, 150, 0, 9000, tile, cd, wet, True, clim)


def test_cd_uniform_drainflow():
    assert cd_load_adjustment(climate([0.002] * 12)) == pytest.approx(57.525, abs=1e-9)


@pytest.mark.parametrize("season,value", [(0, 36.4), (1, 57.2), (2, 54.8), (3, 81.7)])
def test_cd_single_season(season, value):
    q = [0.0] * 12
    for m in range(3 * season, 3 * season + 3):
        q[m] = 0.001 * (m + 1)
    assert cd_load_adjustment(climate(q)) == value


def test_cd_no_drainage():
    with pytest.raises(NoDrainageError, match="no drainage"):
        cd_load_adjustment(climate([0.0] * 12))


@given(st.lists(st.floats(0, 0.01), min_size=12, max_size=12).filter(lambda q: sum(q) > 1e-6))
def test_cd_bounded_by_table(q):
    v = cd_load_adjustment(climate(q))
    assert 36.4 - 1e-9 <= v <= 81.7 + 1e-9


def test_rate_constant():
    p = WetlandParams()
    assert wetland_rate_constant(20.0, p) == 0.15
    mp.mp.dps = 30
    expected = float(mp.mpf("0.15") * mp.power(mp.mpf("1.09"), -20))
    assert wetland_rate_constant(-10.0, p) == pytest.approx(expected, rel=1e-14)
    assert wetland_rate_constant(-10.0, p) == wetland_rate_constant(0.0, p)
    flat = WetlandParams(theta=1.0)
    assert all(wetland_rate_constant(t, flat) == 0.15 for t in (-5, 0, 12, 30))


def test_single_month_example():
    q = [0.0] * 12
    q[5] = 0.001
    expected = 100.0 / (1 + 0.15 * 0.005 / (0.995 * 0.001))
    got = wetland_load_adjustment(climate(q), WetlandParams())
    assert got == pytest.approx(expected, rel=1e-13)
    assert got == pytest.approx(57.02, abs=0.01)


def test_wetland_limits():
    q = [0.001] * 12
    assert wetland_load_adjustment(climate(q), WetlandParams(f_w=1e-9)) == pytest.approx(100.0, abs=1e-3)
    assert wetland_load_adjustment(climate([1e6] * 12)) == pytest.approx(100.0, abs=1e-3)


def test_tanks_in_series_exponential_limit():
    k, f_w = 0.15, 0.005
    for q in (0.001, 0.002, 0.005):  # realistic tile drainflow, m/day
        hlr = hydraulic_loading_rate(q, f_w)
        exact = math.exp(-k / hlr)
        assert float(tanks_in_series_fraction(k, hlr, 64)) == pytest.approx(exact, rel=1e-2)


def test_retained_percent_monotone_in_loading_rate():
    hlrs = np.geomspace(0.01, 10.0, 50)
    retained = 100 * tanks_in_series_fraction(0.15, hlrs, 1)
    assert np.all(np.diff(retained) > 0)
    assert retained[-1] < 100 and retained[-1] > 98


def test_wetland_parameter_sweeps():
    base = [0.001] * 12
    qs = [wetland_load_adjustment(climate([q] * 12)) for q in np.linspace(0.0002, 0.01, 20)]
    assert np.all(np.diff(qs) > 0)
    fws = [wetland_load_adjustment(climate(base), WetlandParams(f_w=f)) for f in np.linspace(0.001, 0.05, 20)]
    assert np.all(np.diff(fws) < 0)
    ks = [wetland_load_adjustment(climate(base), WetlandParams(k_den=k)) for k in np.linspace(0.09, 0.15, 10)]
    assert np.all(np.diff(ks) < 0)


def test_dry_months_carry_no_weight():
    q = [0.001] * 6 + [0.0] * 6
    one = [0.001] * 6
    assert wetland_load_adjustment(climate(q)) == pytest.approx(
        100 * float(np.mean(tanks_in_series_fraction(0.15, hydraulic_loading_rate(np.array(one), 0.005)))))


def test_parameter_validation():
    with pytest.raises(ValueError):
        WetlandParams(n_tanks=0)
    with pytest.raises(ValueError):
        WetlandParams(theta=1.2)
    with pytest.raises(ValueError):
        WetlandParams(k_den=0.5)
    with pytest.raises(ValueError):
        CdrTable((10, 20, 30))
    with pytest.raises(ValueError):
        MonthlyClimate((1,) * 11, WARM)


def test_treated_fractions():
    c = cell(tile=0.2, cd=0.1, wet=0.6)
    assert treated_fraction(c, CD, 1.0) == 0.1
    assert treated_fraction(c, WETLAND_D, 1.0) == 0.2
    assert treated_fraction(c, WETLAND_D_STAR, 0.5) == 0.3
    assert treated_fraction(cell(tile=0.0, cd=0.0, wet=0.6), WETLAND_D, 1.0) == 0.0


def test_cell_multiplier_examples():
    assert effective_cell_load_multiplier(cell(cd=0.0), CD, 1.0, adjustment=40.0) == 1.0
    assert effective_cell_load_multiplier(cell(tile=1.0, cd=1.0), CD, 1.0, adjustment=40.0) == pytest.approx(0.40)
    assert effective_cell_load_multiplier(cell(tile=1.0, cd=0.5), CD, 1.0, adjustment=40.0) == pytest.approx(0.70)
    c = cell(tile=1.0, cd=1.0, clim=climate([0.002] * 12))
    assert effective_cell_load_multiplier(c, CD, 1.0) == pytest.approx(0.57525)
    with pytest.raises(ValueError):
        effective_cell_load_multiplier(c, CD, 1.5)
    with pytest.raises(ValueError):
        effective_cell_load_multiplier(cell(), CD, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(1.0, 1.09), st.floats(0.09, 0.15), st.floats(-15, 35))
def test_rate_constant_positive(theta, k, t):
    assert wetland_rate_constant(t, WetlandParams(theta=theta, k_den=k)) > 0
