"""``fock-echo`` command line: run one experiment and write its CSV artifacts.

Exit status 0 on success, 2 for configuration errors (nothing written) and 3
when the numerics fail (truncation, convergence); partial outputs are removed.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, PRESETS, RunConfig, resolve
from .errors import BelowBarrierError, ContractError, FockEchoError
from .fragility import fragility_scan
from .landau_zener import (analytic_timescales, crossing_times, first_step_depth,
                           gaussian_timescale_fit, markov_reference_curve)
from .loschmidt import le_trace, superposition_traces
from .model import (ModelParams, crossing_parameters, down_population, expectation,
                    mean_position, position_density)
from .propagator import EvolutionConfig, evolve_free, evolve_samples, time_grid
from .states import CatSpec, cat_state, coherent_state

log = logging.getLogger("fockecho")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICS = 0, 2, 3


def _g(x) -> str:
    return f"{float(x):.17g}"


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(v if isinstance(v, str) else _g(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# building blocks from a resolved config

def model_params(cfg: RunConfig, **overrides) -> ModelParams:
    values = dict(e_up=cfg.e_up, e_down=cfg.e_down, v_flip=cfg.v_flip, v_g=cfg.v_g,
                  cutoff=cfg.cutoff or 64)
    values.update(overrides)
    return ModelParams(**values)


def evolution_config(cfg: RunConfig, **overrides) -> EvolutionConfig:
    values = dict(tol=cfg.tol, dt_out=cfg.dt_out, t_max=cfg.t_max)
    values.update(overrides)
    return EvolutionConfig(**values)


def coherent_alpha(cfg: RunConfig) -> float:
    if math.isfinite(cfg.alpha):
        return cfg.alpha
    if cfg.e0 < 0.5:
        raise ConfigError("e0 must be at least the zero-point energy 1/2")
    return math.sqrt(cfg.e0 - 0.5)


def cat_spec(cfg: RunConfig) -> CatSpec:
    if math.isfinite(cfg.alpha1) and math.isfinite(cfg.alpha2):
        return CatSpec(cfg.alpha1, cfg.alpha2)
    return CatSpec.from_energies(cfg.e_bar, cfg.delta_e, opposite_signs=cfg.opposite_signs)


def _sized(cfg: RunConfig, p: ModelParams, energy: float, alphas) -> ModelParams:
    return p if cfg.cutoff else p.with_cutoff_for(energy, tuple(alphas))


# --------------------------------------------------------------------------
# experiments; each returns {filename: text}

def _initial_state(cfg: RunConfig):
    p = model_params(cfg)
    if cfg.state == "coherent":
        alpha = coherent_alpha(cfg)
        p = _sized(cfg, p, alpha**2 + 0.5, (alpha,))
        return coherent_state(alpha, p), p
    if cfg.state == "cat":
        spec = cat_spec(cfg)
        p = _sized(cfg, p, spec.max_energy, (spec.alpha1, spec.alpha2))
        return cat_state(spec, p), p
    raise ConfigError(f"{cfg.experiment} needs state = coherent or cat, got {cfg.state!r}")


def run_evolve(cfg: RunConfig) -> dict[str, str]:
    psi0, p = _initial_state(cfg)
    ecfg = evolution_config(cfg)
    rows = [(t, psi.norm(), expectation(psi, "full", p), mean_position(psi), down_population(psi))
            for t, psi in evolve_samples(psi0, time_grid(ecfg), p, ecfg)]
    return {"evolve.csv": _csv(("t", "norm", "energy", "q_mean", "p_down"), rows)}


def run_echo(cfg: RunConfig) -> dict[str, str]:
    p = model_params(cfg)
    ecfg = evolution_config(cfg)
    traces = []
    if cfg.state == "coherent":
        alpha = coherent_alpha(cfg)
        p = _sized(cfg, p, alpha**2 + 0.5, (alpha,))
        trace = le_trace("coherent", alpha, p, ecfg)
        traces.append(("coherent", trace.times, trace.m))
        e0 = alpha**2 + 0.5
        try:
            ts = analytic_timescales(p, e0)
        except BelowBarrierError:
            log.info("e0 = %g does not reach the crossing; no reference curves", e0)
        else:
            traces.append(("markov", trace.times, markov_reference_curve(ts, trace.times)))
            try:
                tau_g = gaussian_timescale_fit(trace)
            except FockEchoError as exc:
                log.info("no gaussian fit: %s", exc)
            else:
                log.info("tau_G = %.6g, tau_phi = %.6g", tau_g, ts.tau_phi)
                traces.append(("gaussian", trace.times, np.exp(-0.5 * (trace.times / tau_g) ** 2)))
    else:
        spec = cat_spec(cfg)
        p = _sized(cfg, p, spec.max_energy, (spec.alpha1, spec.alpha2))
        if cfg.state == "superposition":
            out = superposition_traces(spec, p, ecfg, mc_seeds=cfg.mc_seeds,
                                       mc_phases=cfg.mc_phases, seed=cfg.seed)
            traces += [(name, tr.times, tr.m) for name, tr in out.items()]
        else:
            trace = le_trace(cfg.state, spec, p, ecfg)
            traces.append((cfg.state, trace.times, trace.m))
    rows = [(t, m, kind) for kind, times, ms in traces for t, m in zip(times, ms)]
    return {"echo.csv": _csv(("t", "m", "kind"), rows)}


def _lz_point(args):
    e0, p, ecfg = args
    info = crossing_parameters(p, e0)
    alpha = math.sqrt(e0 - 0.5)
    t1, t2 = crossing_times(info.q_c, alpha, 4 * math.pi)[:2]
    trace = le_trace("coherent", alpha, p, replace(ecfg, t_max=float(t2) + ecfg.dt_out))
    depth = first_step_depth(trace, info, alpha, times=(t1, t2))
    return e0, p.v_flip, depth, info.p_lz, abs(depth - info.p_lz) / info.p_lz


def run_lz_scan(cfg: RunConfig) -> dict[str, str]:
    base = model_params(cfg)
    for e0 in cfg.lz_e0:
        crossing_parameters(base, e0)  # raises BelowBarrierError before any work
    ecfg = evolution_config(cfg)
    tasks = [(e0, _sized(cfg, replace(base, v_flip=v), e0, (math.sqrt(e0 - 0.5),)), ecfg)
             for e0 in cfg.lz_e0 for v in cfg.lz_v_flip]
    rows = _map(_lz_point, tasks, cfg.workers)
    return {"lz_scan.csv": _csv(("e0", "v_flip", "depth_measured", "p_lz_analytic", "rel_err"), rows)}


def run_fragility_scan(cfg: RunConfig) -> dict[str, str]:
    p = model_params(cfg)
    # the mean echo only needs the averaging window
    ecfg = evolution_config(cfg, t_max=cfg.t_window)
    records, fit = fragility_scan(cfg.e_bars, cfg.delta_es, p, ecfg, t_window=cfg.t_window,
                                  fit_min_delta_e=cfg.fit_min_delta_e,
                                  opposite_signs=cfg.opposite_signs, workers=cfg.workers,
                                  auto_cutoff=not cfg.cutoff)
    rows = [(r.e_bar, r.delta_e, r.m_bar_cat, r.m_bar_inc, r.delta_m) for r in records]
    fit_row = (fit.nu, fit.r_squared) if fit is not None else (math.nan, math.nan)
    if fit is not None:
        log.info("nu = %.6g (log-log R^2 = %.6g)", fit.nu, fit.r_squared)
    return {"fragility.csv": _csv(("e_bar", "delta_e", "m_bar_cat", "m_bar_inc", "delta_m"), rows),
            "fit.csv": _csv(("nu", "r_squared"), [fit_row])}


def run_density(cfg: RunConfig) -> dict[str, str]:
    psi0, p = _initial_state(cfg)
    n_q = int(round((cfg.q_max - cfg.q_min) / cfg.q_step)) + 1
    q = np.linspace(cfg.q_min, cfg.q_max, n_q)
    times = time_grid(evolution_config(cfg, dt_out=cfg.density_dt))
    if cfg.hamiltonian == "free":
        states = ((t, evolve_free(psi0, t)) for t in times)
    else:
        states = evolve_samples(psi0, times, p, evolution_config(cfg, dt_out=cfg.density_dt))
    rows = []
    for t, psi in states:
        rho = position_density(psi, q)
        rows.extend((t, qq, r) for qq, r in zip(q, rho))
    return {"density.csv": _csv(("t", "q", "rho"), rows)}


EXPERIMENT_RUNNERS = {
    "evolve": run_evolve,
    "echo": run_echo,
    "lz-scan": run_lz_scan,
    "fragility-scan": run_fragility_scan,
    "density": run_density,
}


def _map(fn, tasks, workers: int):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


# --------------------------------------------------------------------------

def run(cfg: RunConfig) -> int:
    """Run one experiment; outputs are only written once every result is in."""
    try:
        files = EXPERIMENT_RUNNERS[cfg.experiment](cfg)
    except (ContractError, BelowBarrierError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except FockEchoError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICS
    files["manifest"] = cfg.manifest()
    out = Path(cfg.output_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            path = out / name
            path.write_text(text)
            written.append(path)
    except OSError as exc:
        for path in written:
            path.unlink(missing_ok=True)
        log.error("cannot write outputs: %s", exc)
        return EXIT_NUMERICS
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fock-echo", description=__doc__.splitlines()[0])
    ap.add_argument("experiment", choices=sorted(EXPERIMENT_RUNNERS))
    ap.add_argument("--config", help="flat 'key = value' file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override one config key (repeatable)")
    ap.add_argument("--preset", choices=sorted(PRESETS))
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--workers", type=int)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args.experiment, args.config, args.set, args.preset, args.out, args.workers)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
