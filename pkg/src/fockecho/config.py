"""Flat ``key = value`` run configuration, presets and validation."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ContractError

EXPERIMENTS = ("evolve", "echo", "lz-scan", "fragility-scan", "density")
STATES = ("coherent", "cat", "incoherent", "naive", "superposition")


class ConfigError(ContractError):
    """Malformed, unknown or out-of-range configuration."""


def _floats(text: str) -> tuple[float, ...]:
    items = [s for s in text.replace(";", ",").split(",") if s.strip()]
    return tuple(float(s) for s in items)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


@dataclass
class RunConfig:
    experiment: str = "echo"
    # model
    e_up: float = 0.0
    e_down: float = 100.0
    v_flip: float = 2.0
    v_g: float = 10.0
    cutoff: int = 0  # 0 picks the cutoff from the state energies
    # evolution
    tol: float = 1e-9
    dt_out: float = 0.01
    t_max: float = 20.0
    # state
    state: str = "coherent"
    alpha: float = math.nan
    e0: float = 200.5
    alpha1: float = math.nan
    alpha2: float = math.nan
    e_bar: float = 150.0
    delta_e: float = 0.0
    opposite_signs: bool = True
    # lz-scan
    lz_e0: tuple = (100.5, 225.5, 400.5)
    lz_v_flip: tuple = (1.0, 2.0, 3.0, 4.0)
    # fragility-scan
    e_bars: tuple = (150.0, 200.0, 250.0, 300.0)
    delta_es: tuple = (0.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0)
    t_window: float = 20.0
    fit_min_delta_e: float = 100.0
    # density
    hamiltonian: str = "full"
    density_dt: float = 0.1
    q_min: float = -40.0
    q_max: float = 40.0
    q_step: float = 0.1
    # monte-carlo check of the incoherent echo (echo experiment)
    mc_seeds: int = 0
    mc_phases: int = 128
    seed: int = 0
    # orchestration
    output_dir: str = "."
    workers: int = 1

    def manifest(self) -> str:
        return "".join(f"{f.name} = {_fmt(getattr(self, f.name))}\n" for f in fields(self))

    def validate(self) -> "RunConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.state not in STATES:
            raise ConfigError(f"state must be one of {STATES}, got {self.state!r}")
        if self.hamiltonian not in ("free", "full"):
            raise ConfigError("hamiltonian must be 'free' or 'full'")
        for name in ("tol", "dt_out", "density_dt", "q_step"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.experiment == "fragility-scan" and not self.t_window > 0:
            raise ConfigError("t_window must be positive")
        for name in ("t_max", "t_window", "mc_seeds", "cutoff"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be non-negative")
        if not self.q_max > self.q_min:
            raise ConfigError("q_max must exceed q_min")
        if self.workers < 1 or self.mc_phases < 1:
            raise ConfigError("workers and mc_phases must be >= 1")
        if self.experiment == "lz-scan" and (not self.lz_e0 or not self.lz_v_flip):
            raise ConfigError("lz-scan needs non-empty lz_e0 and lz_v_flip")
        if self.experiment == "fragility-scan" and (not self.e_bars or not self.delta_es):
            raise ConfigError("fragility-scan needs non-empty e_bars and delta_es")
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, float) and f.name not in ("alpha", "alpha1", "alpha2") and not math.isfinite(value):
                raise ConfigError(f"{f.name} must be finite")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, text: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "float":
            return float(text)
        if kind == "int":
            value = float(text)
            if value != int(value):
                raise ValueError("not an integer")
            return int(value)
        if kind == "bool":
            return _bool(text)
        if kind == "tuple":
            return _floats(text)
        return text.strip()
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None


def parse_pairs(lines, source: str = "config") -> dict[str, object]:
    """Parse ``key = value`` lines; '#' starts a comment.  Unknown keys are errors."""
    out = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = _convert(key, value)
    return out


PRESETS: dict[str, dict[str, object]] = {
    "fig1": dict(experiment="echo", state="coherent", e0=200.5, v_flip=2.0, t_max=40.0),
    "fig2": dict(experiment="density", state="cat", e_bar=400.0, delta_e=0.0, opposite_signs=True,
                 v_flip=2.0, t_max=12.0, density_dt=0.1, q_step=0.1),
    "fig3": dict(experiment="lz-scan", lz_e0=(100.5, 225.5, 400.5), lz_v_flip=(1.0, 2.0, 3.0, 4.0)),
    "fig4a": dict(experiment="echo", state="superposition", e_bar=150.0, delta_e=0.0, t_max=20.0),
    "fig4b": dict(experiment="echo", state="superposition", e_bar=150.0, delta_e=200.0, t_max=20.0),
    "fig5": dict(experiment="fragility-scan", e_bars=(150.0, 200.0, 250.0, 300.0),
                 delta_es=(0.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0), t_window=20.0, t_max=20.0),
}


def resolve(experiment: str | None = None, config_path: str | Path | None = None, sets=(),
            preset: str | None = None, output_dir: str | None = None,
            workers: int | None = None) -> RunConfig:
    """Merge defaults < preset < config file < ``--set`` pairs < explicit flags."""
    values: dict[str, object] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        values.update(PRESETS[preset])
    if config_path is not None:
        path = Path(config_path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        values.update(parse_pairs(text.splitlines(), str(path)))
    values.update(parse_pairs(sets, "--set"))
    if experiment is not None:
        if preset is not None and values.get("experiment", experiment) != experiment:
            raise ConfigError(f"preset {preset!r} runs {values['experiment']!r}, not {experiment!r}")
        values["experiment"] = experiment
    if output_dir is not None:
        values["output_dir"] = str(output_dir)
    if workers is not None:
        values["workers"] = int(workers)
    return RunConfig(**values).validate()
