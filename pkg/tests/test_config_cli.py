import json
from pathlib import Path

import pytest

from transmission_lab.cli import main
from transmission_lab.config import ScenarioConfig, dump_config, load_config
from transmission_lab.errors import ConfigError
from transmission_lab.geometry import read_mesh

ROOT = Path(__file__).resolve().parents[1]
DEFAULT = ROOT / "configs" / "default.ini"


def write_ini(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_default_config_loads():
    cfg = load_config(DEFAULT)
    assert cfg.coefficients.c0 == 0.5
    assert cfg.experiment.modes == (0, 1, 2)
    assert cfg.conductivities.M_i == (1.0, 0.0, 1.0)
    assert load_config(DEFAULT, seed=7).run.seed == 7


def test_dump_roundtrip(tmp_path):
    cfg = load_config(DEFAULT)
    back = load_config(write_ini(tmp_path, dump_config(cfg)))
    assert back == cfg


@pytest.mark.parametrize("text, key", [
    ("[geometry]\nr_inner = 3.0\nr_outer = 2.0\n", "geometry.r_inner"),
    ("[geometry]\nfoo = 1\n", "geometry.foo"),
    ("[nonsense]\na = 1\n", "nonsense"),
    ("[conductivities]\nM_e = 1, 2, 1\n", "conductivities.M_e"),
    ("[cable]\ntheta = 2\n", "cable.theta"),
    ("[experiment]\nlambdas = 1e-2, -1\n", "experiment.lambdas"),
    ("[run]\nseed = abc\n", "run.seed"),
    ("[elasticity]\nmu_i = 0\n", "elasticity"),
])
def test_config_errors_name_the_key(tmp_path, text, key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        load_config(write_ini(tmp_path, text))


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.ini")


def test_cli_config_error_exit_code(tmp_path, capsys):
    p = write_ini(tmp_path, "[geometry]\nr_inner = 3.0\n")
    assert main(["mesh", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "geometry.r_inner" in capsys.readouterr().err


def test_mesh_command_exports_readable_mesh(tmp_path):
    out = tmp_path / "o"
    assert main(["mesh", "--config", str(DEFAULT), "--out", str(out)]) == 0
    m = read_mesh(out / "mesh.txt")
    summary = json.loads((out / "mesh_summary.json").read_text())
    assert summary["vertices"] == m.n_vertices
    assert (out / "config_used.ini").exists()


def test_existence_check_with_vanishing_prefactor(tmp_path, capsys):
    p = write_ini(tmp_path, "[coefficients]\nbeta_i = 1.0\n")
    out = tmp_path / "o"
    assert main(["existence-check", "--config", str(p), "--out", str(out)]) == 0
    rep = json.loads((out / "existence_check.json").read_text())
    assert rep["status"] == "identically satisfied"
    assert rep["existence_condition"] == 0.0
    assert "identically satisfied" in capsys.readouterr().out


def test_cauchy_sweep_is_deterministic(tmp_path):
    runs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert main(["cauchy-sweep", "--config", str(DEFAULT), "--out", str(out), "--seed", "3"]) == 0
        runs.append((out / "cauchy_sweep.csv").read_bytes())
    assert runs[0] == runs[1]
    assert runs[0].startswith(b"lambda,misfit,recovery_error\n")


def test_supplement_needs_isotropic_tensors(tmp_path, capsys):
    p = write_ini(tmp_path, "[conductivities]\nM_e = 1.0, 0.2, 1.0\n")
    assert main(["supplement-solve", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "isotropic" in capsys.readouterr().err


@pytest.mark.parametrize("cmd", ["nullspace-demo", "elasticity-demo", "cardio-operator"])
def test_demo_commands_pass_on_defaults(tmp_path, cmd):
    assert main([cmd, "--config", str(DEFAULT), "--out", str(tmp_path / "o")]) == 0


def test_scenario_builders():
    cfg = ScenarioConfig()
    assert cfg.cable_coefficients().kappa == pytest.approx(1.0)
    assert cfg.transmission_coefficients().prefactor == -1.0
    assert cfg.lame_parameters()[0].lam == 2.0
