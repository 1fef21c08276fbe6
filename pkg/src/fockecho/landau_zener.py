"""Landau-Zener reading of echo traces.

Analytic timescales of single and repeated passages through the avoided
crossing, plus the trace analyses that compare a simulation with them: first
step depth, Gaussian decay time and step/revival detection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ExtractionError, FitDomainError
from .loschmidt import LETrace
from .model import CrossingInfo, ModelParams, crossing_parameters


@dataclass(frozen=True)
class Timescales:
    """Decay and fluctuation timescales at one initial energy (units 1/omega0).

    Attributes:
        tau_phi: Markovian decay time from concatenated single-passage LZ events.
        tau_updown: 1/|v_flip|.
        tau_down: 2 pi n1.
        n1: density of directly connected states at e0.
        tau_z: Zener fluctuation scale for the linearized sweep.
        tau_dqd: quantum-diffusion scale 4 sqrt(e0 e_c), diagnostic only.
        tau_g: fitted Gaussian time, once a trace has been fitted.
    """

    tau_phi: float
    tau_updown: float
    tau_down: float
    n1: float
    tau_z: float
    tau_dqd: float
    tau_g: float | None = None

    def with_fit(self, tau_g: float) -> "Timescales":
        return replace(self, tau_g=tau_g)


def zener_time(info: CrossingInfo) -> float:
    return 1.0 / math.sqrt(info.sweep_rate)


def analytic_timescales(p: ModelParams, e0: float) -> Timescales:
    info = crossing_parameters(p, e0)
    root = math.sqrt(info.e_c * (e0 - info.e_c))
    n1 = 1.0 / (4.0 * math.pi * root)
    tau_down = 2.0 * math.pi * n1
    v_sq = p.v_flip**2
    return Timescales(
        tau_phi=math.inf if v_sq == 0 else 2.0 * root / v_sq,
        tau_updown=math.inf if p.v_flip == 0 else 1.0 / abs(p.v_flip),
        tau_down=tau_down,
        n1=n1,
        tau_z=zener_time(info),
        tau_dqd=4.0 * math.sqrt(e0 * info.e_c),
    )


def crossing_times(q_c: float, alpha: float, t_max: float) -> np.ndarray:
    """Times in [0, t_max] at which sqrt(2) alpha cos(t) passes q_c."""
    amplitude = math.sqrt(2.0) * alpha
    if amplitude == 0 or abs(q_c) > abs(amplitude):
        return np.array([])
    theta = math.acos(q_c / amplitude)
    out = []
    k = 0
    while 2 * math.pi * k - theta <= t_max:
        for t in (2 * math.pi * k - theta, 2 * math.pi * k + theta):
            if 0 <= t <= t_max and (not out or t > out[-1] + 1e-12):
                out.append(t)
        k += 1
    return np.array(out)


def first_step_depth(trace: LETrace, info: CrossingInfo, alpha: float | None = None,
                     times: tuple[float, float] | None = None) -> float:
    """Median echo on the plateau between the first two passages.

    The plateau window is [t1 + 3 tau_Z, t2 - 3 tau_Z].  Passage times come from
    the unperturbed trajectory sqrt(2) alpha cos(t) unless given explicitly.
    ``alpha`` defaults to the positive root of e0 = alpha^2 + 1/2.
    """
    if times is None:
        if alpha is None:
            alpha = math.sqrt(max(info.e0 - 0.5, 0.0))
        passes = crossing_times(info.q_c, alpha, float(trace.times[-1]) + 2 * math.pi)
        if passes.size < 2:
            raise ExtractionError("the packet does not reach the crossing twice")
        t1, t2 = passes[:2]
    else:
        t1, t2 = times
    pad = 3.0 * zener_time(info) if info.q_dot_c > 0 else 0.0
    window = (trace.times >= t1 + pad) & (trace.times <= t2 - pad)
    if not window.any():
        raise ExtractionError(f"no samples in the plateau window [{t1 + pad:.4g}, {t2 - pad:.4g}]")
    return float(np.median(trace.m[window]))


def revival_mask(m: np.ndarray, rtol: float = 1e-4) -> np.ndarray:
    """True where the echo sits above everything seen before it (a revival bump)."""
    running_min = np.minimum.accumulate(m)
    return m > running_min * (1.0 + rtol)


def gaussian_timescale_fit(trace: LETrace) -> float:
    """tau_G of M(t) ~ exp(-(t/tau_G)^2 / 2) fitted on the decay down to M = 0.5.

    Least squares of -2 ln M against t^2 through the origin; revival points are
    left out of the fit.
    """
    below = np.nonzero(trace.m < 0.5)[0]
    if below.size == 0:
        raise FitDomainError("the trace never decays below 0.5")
    stop = below[0]
    m = trace.m[:stop]
    t = trace.times[:stop]
    keep = ~revival_mask(m) & (m > 0)
    x = t[keep] ** 2
    y = -2.0 * np.log(np.minimum(m[keep], 1.0))
    denom = float(np.dot(x, x))
    slope = float(np.dot(x, y)) / denom if denom > 0 else 0.0
    if slope <= 0:
        raise FitDomainError("no decay in the fit window")
    return 1.0 / math.sqrt(slope)


def markov_reference_curve(ts: Timescales, times) -> np.ndarray:
    return np.exp(-np.asarray(times, dtype=float) / ts.tau_phi)


@dataclass(frozen=True)
class StepDrop:
    onset: float
    steepest: float
    end: float
    depth: float


def find_step_drops(trace: LETrace, slope: float = 0.3, min_depth: float = 0.01,
                    merge_gap: float = 0.05) -> list[StepDrop]:
    """Locate the sharp downward steps of an echo trace.

    A step is a stretch where dM/dt < -slope, losing at least ``min_depth``.
    Its ``onset`` is where the descent starts, which is when the packet reaches
    the crossing; the steepest point lags it by the time the flipped component
    needs to separate from the free one.
    """
    t, m = trace.times, trace.m
    if t.size < 3:
        return []
    grad = np.gradient(m, t)
    falling = grad < -slope
    edges = np.diff(np.concatenate([[0], falling.astype(int), [0]]))
    starts = list(np.nonzero(edges == 1)[0])
    ends = list(np.nonzero(edges == -1)[0] - 1)
    regions = []
    for s, e in zip(starts, ends):
        if regions and t[s] - t[regions[-1][1]] < merge_gap:
            regions[-1][1] = e
        else:
            regions.append([s, e])
    drops = []
    for s, e in regions:
        before = m[max(s - 1, 0)]
        after = m[min(e + 1, m.size - 1)]
        if before - after < min_depth:
            continue
        k = s + int(np.argmin(grad[s:e + 1]))
        drops.append(StepDrop(onset=float(t[s]), steepest=float(t[k]), end=float(t[e]),
                              depth=float(before - after)))
    return drops


def revival_between(trace: LETrace, t_a: float, t_b: float, min_rise: float = 1e-3) -> float | None:
    """Time of a local maximum of M in (t_a, t_b), or None.

    The maximum must rise at least ``min_rise`` above the lowest value that
    precedes it in the interval, and M must fall right after it.  It may sit on
    the last sample before ``t_b``, since a revival peaks just as the next step
    begins.
    """
    sel = np.nonzero((trace.times > t_a) & (trace.times < t_b))[0]
    if sel.size < 2:
        return None
    m = trace.m[sel]
    k = int(np.argmax(m - np.minimum.accumulate(m)))
    rise = m[k] - np.min(m[:k + 1])
    idx = sel[k]
    if rise < min_rise or idx + 1 >= trace.m.size or trace.m[idx + 1] >= trace.m[idx]:
        return None
    return float(trace.times[idx])
