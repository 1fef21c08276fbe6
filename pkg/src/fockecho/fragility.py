"""Fragility of cat states: time-averaged echo gap between cat and incoherent states."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractError, ExtractionError
from .loschmidt import LETrace, superposition_traces
from .model import ModelParams
from .propagator import EvolutionConfig
from .states import CatSpec

log = logging.getLogger(__name__)

DEFAULT_WINDOW = 20.0
DEFAULT_FIT_MIN_DELTA_E = 100.0


@dataclass(frozen=True)
class FragilityRecord:
    e_bar: float
    delta_e: float
    m_bar_cat: float
    m_bar_inc: float
    delta_m: float
    alpha1: float = math.nan
    alpha2: float = math.nan
    skipped: str = ""

    @property
    def ok(self) -> bool:
        return not self.skipped


@dataclass
class ScalingFit:
    """Exponential fragility law ln dM = a(E) + slope(E) dE, slope ~ E^-nu.

    ``r_squared`` is the quality of the log-log fit across rows and
    ``row_r_squared`` that of each row's ln dM vs dE line.
    """

    nu: float
    slope_per_ebar: dict[float, float]
    r_squared: float
    row_r_squared: dict[float, float] = field(default_factory=dict)
    intercept: float = math.nan


def mean_le(trace: LETrace, t_window: float = DEFAULT_WINDOW) -> float:
    """(1/T) * integral_0^T M(t) dt by the trapezoid rule."""
    if t_window <= 0:
        raise ContractError("t_window must be positive")
    if trace.times[0] > 1e-12 or trace.times[-1] < t_window - 1e-9:
        raise ExtractionError(f"trace spans [{trace.times[0]}, {trace.times[-1]}], need [0, {t_window}]")
    t = trace.times
    m = trace.m
    inside = t <= t_window + 1e-12
    t_in, m_in = t[inside], m[inside]
    if t_in[-1] < t_window:
        m_end = np.interp(t_window, t, m)
        t_in = np.append(t_in, t_window)
        m_in = np.append(m_in, m_end)
    return float(np.trapezoid(m_in, t_in) / t_window)


def fragility_point(spec: CatSpec, p: ModelParams, cfg: EvolutionConfig,
                    t_window: float = DEFAULT_WINDOW, auto_cutoff: bool = True) -> FragilityRecord:
    """Mean cat and incoherent echoes over [0, t_window] and their difference."""
    if auto_cutoff:
        p = p.with_cutoff_for(spec.max_energy, (spec.alpha1, spec.alpha2))
    if cfg.t_max < t_window:
        cfg = replace(cfg, t_max=t_window)
    traces = superposition_traces(spec, p, cfg)
    m_cat = mean_le(traces["cat"], t_window)
    m_inc = mean_le(traces["incoherent"], t_window)
    return FragilityRecord(spec.e_bar, spec.delta_e, m_cat, m_inc, abs(m_inc - m_cat),
                           spec.alpha1, spec.alpha2)


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def fit_scaling(records, fit_min_delta_e: float = DEFAULT_FIT_MIN_DELTA_E) -> ScalingFit | None:
    """Fit ln dM vs dE per mean energy, then slope(E) = C E^-nu across energies.

    Rows need at least two points with dE >= fit_min_delta_e and a positive
    slope to enter the exponent fit.  Returns None if fewer than two rows qualify.
    """
    rows: dict[float, list[FragilityRecord]] = {}
    for r in records:
        if r.ok and r.delta_e >= fit_min_delta_e - 1e-9 and r.delta_m > 0:
            rows.setdefault(r.e_bar, []).append(r)
    slopes, row_r2 = {}, {}
    for e_bar, rs in sorted(rows.items()):
        if len(rs) < 2:
            continue
        x = np.array([r.delta_e for r in rs])
        y = np.log([r.delta_m for r in rs])
        slope, _, r2 = _linfit(x, y)
        slopes[e_bar] = slope
        row_r2[e_bar] = r2
    usable = {e: s for e, s in slopes.items() if s > 0}
    if len(usable) < 2:
        return None
    e = np.array(sorted(usable))
    s = np.array([usable[k] for k in e])
    neg_nu, intercept, r2 = _linfit(np.log(e), np.log(s))
    return ScalingFit(nu=-neg_nu, slope_per_ebar=slopes, r_squared=r2, row_r_squared=row_r2,
                      intercept=intercept)


def _scan_task(args):
    e_bar, delta_e, p, cfg, t_window, opposite_signs, auto_cutoff = args
    spec = CatSpec.from_energies(e_bar, delta_e, opposite_signs=opposite_signs)
    rec = fragility_point(spec, p, cfg, t_window, auto_cutoff)
    # report the requested grid point rather than the value rebuilt from the displacements
    return replace(rec, e_bar=e_bar, delta_e=delta_e)


def fragility_scan(e_bars, delta_es, p: ModelParams, cfg: EvolutionConfig,
                   t_window: float = DEFAULT_WINDOW,
                   fit_min_delta_e: float = DEFAULT_FIT_MIN_DELTA_E,
                   opposite_signs: bool = True, workers: int = 1, auto_cutoff: bool = True):
    """Fragility records on the (e_bar x delta_e) grid plus the scaling fit.

    Records come back in grid order (e_bar major) whatever the worker count.
    Unreachable grid points yield a record with ``skipped`` set.
    """
    e_bars, delta_es = list(e_bars), list(delta_es)
    if not e_bars or not delta_es:
        raise ContractError("scan grids must be non-empty")
    grid = [(float(e), float(d)) for e in e_bars for d in delta_es]
    records: list[FragilityRecord | None] = [None] * len(grid)
    tasks, slots = [], []
    for i, (e, d) in enumerate(grid):
        if e - 0.5 * d - 0.5 < 0 or d < 0:
            log.warning("skipping unreachable point e_bar=%g delta_e=%g", e, d)
            records[i] = FragilityRecord(e, d, math.nan, math.nan, math.nan, skipped="unreachable")
            continue
        tasks.append((e, d, p, cfg, t_window, opposite_signs, auto_cutoff))
        slots.append(i)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_task, tasks))
    else:
        results = [_scan_task(t) for t in tasks]
    for i, rec in zip(slots, results):
        records[i] = rec
    return records, fit_scaling(records, fit_min_delta_e)
