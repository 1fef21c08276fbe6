import csv
import math

import numpy as np
import pytest

from fockecho import LETrace, crossing_parameters, first_step_depth
from fockecho.cli import main
from fockecho.config import ConfigError, RunConfig, parse_pairs, resolve
from fockecho.model import default_params


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_unknown_key_is_rejected_without_output(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("t_max = 1\nbogus = 3\n")
    out = tmp_path / "out"
    assert main(["echo", "--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()


@pytest.mark.parametrize("override", ["t_max=-1", "state=squeezed", "tol=abc", "e0=0.1", "nonsense"])
def test_bad_values_exit_with_config_status(tmp_path, override):
    out = tmp_path / "out"
    assert main(["echo", "--set", override, "--out", str(out)]) == 2
    assert not out.exists()


def test_truncation_exits_with_numerics_status(tmp_path):
    out = tmp_path / "out"
    assert main(["echo", "--set", "cutoff=30", "--out", str(out)]) == 3
    assert not out.exists()


def test_config_parsing_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nv_flip = 3   # trailing\nlz_e0 = 100.5, 225.5\nopposite_signs = no\n")
    rc = resolve("lz-scan", cfg, ["v_flip=4"], None, str(tmp_path), 2)
    assert rc.v_flip == 4.0 and rc.lz_e0 == (100.5, 225.5) and rc.opposite_signs is False
    assert rc.workers == 2 and rc.output_dir == str(tmp_path)
    with pytest.raises(ConfigError):
        resolve("echo", preset="fig3")
    with pytest.raises(ConfigError):
        parse_pairs(["cutoff = 2.5"])


def test_manifest_round_trips(tmp_path):
    rc = resolve("echo", preset="fig4b", output_dir=str(tmp_path))
    again = resolve(None, None, rc.manifest().splitlines())
    assert again.manifest() == rc.manifest()


def test_reference_preset_plateau(tmp_path):
    out = tmp_path / "fig1"
    assert main(["echo", "--preset", "fig1", "--set", "t_max=6", "--out", str(out)]) == 0
    rows = [r for r in _rows(out / "echo.csv") if r["kind"] == "coherent"]
    trace = LETrace([float(r["t"]) for r in rows], [float(r["m"]) for r in rows], "reduced")
    info = crossing_parameters(default_params(), 200.5)
    depth = first_step_depth(trace, info, math.sqrt(200))
    assert abs(depth - info.p_lz) / info.p_lz < 0.05
    kinds = {r["kind"] for r in _rows(out / "echo.csv")}
    assert kinds == {"coherent", "markov"}
    assert (out / "manifest").read_text().startswith("experiment = echo\n")


def test_superposition_preset_writes_three_kinds_deterministically(tmp_path):
    args = ["echo", "--preset", "fig4b", "--set", "t_max=1", "--set", "dt_out=0.1"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "echo.csv").read_bytes()
    assert first == (tmp_path / "b" / "echo.csv").read_bytes()
    rows = _rows(tmp_path / "a" / "echo.csv")
    assert [r["kind"] for r in rows[::11]] == ["cat", "incoherent", "naive"]
    assert all(len(r["m"].replace("-", "").replace(".", "")) <= 20 for r in rows)


def test_monte_carlo_kind_is_seeded(tmp_path):
    args = ["echo", "--preset", "fig4b", "--set", "t_max=1", "--set", "dt_out=0.5",
            "--set", "mc_seeds=4", "--set", "seed=7"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "echo.csv").read_bytes()
    assert a == (tmp_path / "b" / "echo.csv").read_bytes()
    assert b"incoherent_mc" in a


def test_lz_scan_merge_is_worker_independent(tmp_path):
    args = ["lz-scan", "--set", "lz_e0=100.5", "--set", "lz_v_flip=1,3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    assert (tmp_path / "a" / "lz_scan.csv").read_bytes() == (tmp_path / "b" / "lz_scan.csv").read_bytes()
    rows = _rows(tmp_path / "a" / "lz_scan.csv")
    assert [float(r["v_flip"]) for r in rows] == [1.0, 3.0]
    assert all(float(r["rel_err"]) < 0.05 for r in rows)


def test_fragility_scan_outputs(tmp_path):
    args = ["fragility-scan", "--set", "e_bars=60,80", "--set", "delta_es=0,20,40",
            "--set", "t_window=2", "--set", "fit_min_delta_e=20", "--out", str(tmp_path)]
    assert main(args) == 0
    rows = _rows(tmp_path / "fragility.csv")
    assert [(float(r["e_bar"]), float(r["delta_e"])) for r in rows][:3] == [(60, 0), (60, 20), (60, 40)]
    fit = _rows(tmp_path / "fit.csv")
    assert list(fit[0]) == ["nu", "r_squared"]


def test_density_and_evolve(tmp_path):
    assert main(["density", "--set", "state=coherent", "--set", "e0=50.5", "--set", "t_max=0.2",
                 "--set", "hamiltonian=free", "--set", "q_step=0.05", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "density.csv")
    t = np.array([float(r["t"]) for r in rows])
    q = np.array([float(r["q"]) for r in rows])
    rho = np.array([float(r["rho"]) for r in rows])
    for ti in np.unique(t):
        sel = t == ti
        assert np.trapezoid(rho[sel], q[sel]) == pytest.approx(1.0, abs=1e-6)
    assert main(["evolve", "--set", "t_max=1", "--set", "dt_out=0.5", "--out", str(tmp_path)]) == 0
    ev = _rows(tmp_path / "evolve.csv")
    assert len(ev) == 3 and abs(float(ev[-1]["norm"]) - 1) < 1e-8


def test_evolve_rejects_mixture_state(tmp_path):
    assert main(["evolve", "--set", "state=incoherent", "--out", str(tmp_path / "x")]) == 2
    assert not (tmp_path / "x").exists()


def test_runconfig_defaults_validate():
    assert RunConfig().validate().experiment == "echo"
