import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockecho import (CatSpec, EvolutionConfig, FragilityRecord, LETrace, fit_scaling,
                      fragility_point, fragility_scan, mean_le)
from fockecho.model import default_params

SHORT = EvolutionConfig(t_max=4.0, dt_out=0.02)


def test_mean_of_constant_and_triangle():
    t = np.linspace(0, 20, 2001)
    assert mean_le(LETrace(t, np.ones_like(t), "reduced")) == pytest.approx(1.0)
    assert mean_le(LETrace(t, 1 - t / 20, "reduced"), 20.0) == pytest.approx(0.5)


def test_mean_interpolates_window_end():
    t = np.linspace(0, 3, 4)
    assert mean_le(LETrace(t, 1 - t / 5, "reduced"), 2.5) == pytest.approx(1 - 1.25 / 5)


@given(st.lists(st.floats(0.0, 1.0), min_size=3, max_size=50))
def test_mean_within_trace_range(values):
    m = np.array(values)
    t = np.arange(m.size, dtype=float)
    mean = mean_le(LETrace(t, m, "reduced"), float(t[-1]))
    assert m.min() - 1e-12 <= mean <= m.max() + 1e-12


def test_synthetic_exponent_recovered():
    records = []
    for e_bar in (150.0, 200.0, 250.0, 300.0):
        for delta_e in (0.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0):
            dm = math.exp(delta_e / e_bar**3.5)
            records.append(FragilityRecord(e_bar, delta_e, 0.5, 0.5 + dm, dm))
    fit = fit_scaling(records)
    assert fit.nu == pytest.approx(3.5, abs=1e-6)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)


def test_scaling_fit_needs_two_rows():
    records = [FragilityRecord(150.0, d, 0.5, 0.6, math.exp(d / 100)) for d in (100.0, 200.0)]
    assert fit_scaling(records) is None


def test_degenerate_cat_has_no_fragility():
    p = default_params()
    alpha = math.sqrt(150)
    rec = fragility_point(CatSpec(alpha, alpha), p, SHORT, t_window=4.0)
    assert abs(rec.delta_m) < 1e-8


def test_swap_invariance():
    p = default_params()
    a1, a2 = math.sqrt(200), -math.sqrt(80)
    one = fragility_point(CatSpec(a1, a2), p, SHORT, t_window=4.0)
    two = fragility_point(CatSpec(a2, a1), p, SHORT, t_window=4.0)
    assert one.delta_m == pytest.approx(two.delta_m, abs=1e-9)


def test_energy_separation_increases_fragility():
    p = default_params()
    cfg = EvolutionConfig(t_max=20.0)
    low = fragility_point(CatSpec.from_energies(150, 0), p, cfg)
    high = fragility_point(CatSpec.from_energies(150, 200), p, cfg)
    assert low.delta_m > 0
    assert high.delta_m > low.delta_m


def test_scan_order_and_skips():
    p = default_params()
    records, fit = fragility_scan([40.0, 60.0], [0.0, 100.0], p, SHORT, t_window=4.0)
    assert [(r.e_bar, r.delta_e) for r in records] == [(40, 0), (40, 100), (60, 0), (60, 100)]
    assert records[1].skipped and not records[0].skipped
    assert records[3].delta_e == 100.0
    assert fit is None


def test_scan_worker_count_does_not_change_results():
    p = default_params()
    serial, _ = fragility_scan([60.0], [0.0, 20.0], p, SHORT, t_window=2.0)
    pooled, _ = fragility_scan([60.0], [0.0, 20.0], p, SHORT, t_window=2.0, workers=2)
    assert serial == pooled
