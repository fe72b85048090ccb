import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from alexlab import cli
from alexlab.config import ConfigError, RunConfig, from_dict, load

SMALL_SWEEP = """
family = "perturbed"
center = [0.2, -0.1, 1.3]
samples = 1500
directions = 3
eps_grid = [0.04, 0.02]
"""


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- configuration ----------------------------------------------------------

def test_defaults_valid():
    cfg = from_dict({})
    assert cfg == RunConfig()
    assert np.allclose(cfg.center_point(), [0, 0, 1])
    Q = cfg.frame_matrix()
    assert np.allclose(Q @ Q.T, np.eye(3))


@pytest.mark.parametrize("data, field", [
    ({"bogus": 1}, "bogus"),
    ({"n": 1}, "'n'"),
    ({"n": 2.5}, "'n'"),
    ({"eps_grid": []}, "eps_grid"),
    ({"eps_grid": [0.1, 0.0]}, "eps_grid"),
    ({"eps_grid": [0.05, 0.1]}, "eps_grid"),
    ({"center": [0.0, 0.0, -1.0]}, "center"),
    ({"center": [0.0, 1.0]}, "center"),
    ({"profile": "spiky"}, "profile"),
    ({"samples": True}, "samples"),
    ({"seed": -1}, "seed"),
])
def test_invalid_configs(data, field):
    with pytest.raises(ConfigError, match=field):
        from_dict(data)


def test_zero_grid_allowed():
    assert from_dict({"eps_grid": [0]}).eps_grid == [0.0]


def test_toml_error_mentions_line(tmp_path):
    path = write(tmp_path, 'n = 3\nfamily = "sphere\n')
    with pytest.raises(ConfigError, match="line 2"):
        load(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load(str(tmp_path / "nope.toml"))


# -- exit codes -------------------------------------------------------------

def test_unknown_key_exit_2(tmp_path, capsys):
    assert cli.main(["analyze", "--config", write(tmp_path, "colour = 1\n")]) == 2
    assert "colour" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_empty_grid_exit_2(tmp_path):
    path = write(tmp_path, "eps_grid = []\n")
    assert cli.main(["sweep", "--config", path, "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_bad_arguments_exit_2(tmp_path):
    assert cli.main(["analyze", "--threads", "x"]) == 2
    assert cli.main(["frobnicate"]) == 2
    assert cli.main(["analyze", "--threads", "0", "--out", str(tmp_path)]) == 2


def test_bad_env_threads(tmp_path, monkeypatch):
    monkeypatch.setenv("ALEXLAB_THREADS", "many")
    assert cli.main(["analyze", "--out", str(tmp_path)]) == 2


def test_engine_failure_exit_1(tmp_path, monkeypatch, capsys):
    from alexlab import moving_planes

    def boom(*a, **k):
        raise moving_planes.EngineError("containment never fails over the scan")

    monkeypatch.setattr(cli.stability, "analyze", boom)
    path = write(tmp_path, 'family = "sphere"\nsamples = 500\n')
    assert cli.main(["analyze", "--config", path, "--out", str(tmp_path / "o")]) == 1
    assert "engine failure" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


# -- commands ---------------------------------------------------------------

def test_analyze_sphere(tmp_path):
    path = write(tmp_path, 'family = "sphere"\nsamples = 2000\ndirections = 4\nmc_samples = 5000\n')
    out = tmp_path / "o"
    assert cli.main(["analyze", "--config", path, "--out", str(out)]) == 0
    rows = read_csv(out / "report.csv")
    assert len(rows) == 4
    assert list(rows[0]) == cli.DIRECTION_HEADER
    info = json.loads((out / "report.json").read_text())
    assert info["gap"] < 1e-7
    assert info["C_emp"] is None
    assert info["center_of_mass"]["dist_to_O"] < 3 * info["center_of_mass"]["stderr"]
    assert info["sphere_graph"]["sup"] < 1e-7


def test_analyze_perturbed(tmp_path):
    path = write(tmp_path, 'eps = 0.03\nsamples = 1500\ndirections = 3\nmc_samples = 0\n')
    out = tmp_path / "o"
    assert cli.main(["analyze", "--config", path, "--out", str(out)]) == 0
    rows = read_csv(out / "report.csv")
    assert len(rows) == 3
    assert all(float(r["sup_defect"]) > 0 for r in rows)
    assert all(len(r["omega"].split()) == 3 for r in rows)


def test_sweep_outputs_and_determinism(tmp_path, monkeypatch):
    path = write(tmp_path, SMALL_SWEEP)
    a, b, c = (tmp_path / d for d in "abc")
    assert cli.main(["sweep", "--config", path, "--out", str(a), "--svg"]) == 0
    assert cli.main(["sweep", "--config", path, "--out", str(b), "--threads", "2"]) == 0
    monkeypatch.setenv("ALEXLAB_THREADS", "3")
    assert cli.main(["sweep", "--config", path, "--out", str(c)]) == 0
    text = (a / "report.csv").read_bytes()
    assert text == (b / "report.csv").read_bytes() == (c / "report.csv").read_bytes()
    assert b"\r" not in text
    rows = read_csv(a / "report.csv")
    assert [float(r["eps"]) for r in rows] == [0.04, 0.02]
    assert list(rows[0]) == cli.SWEEP_HEADER
    assert rows[0]["slope_so_far"] == "nan"
    assert abs(float(rows[1]["slope_so_far"]) - 1) < 0.2
    svg = (a / "gap_vs_osc.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<circle") == 2
    assert not (b / "gap_vs_osc.svg").exists()
    # no temporary files left behind
    assert sorted(os.listdir(a)) == ["gap_vs_osc.svg", "report.csv", "report.json"]


def test_csv_round_trips_doubles():
    x = 0.1 + 0.2
    text = cli.csv_text(["a", "b", "c"], [[x, float("nan"), True]])
    row = text.splitlines()[1].split(",")
    assert float(row[0]) == x
    assert row[1:] == ["nan", "true"]


def test_check_props(tmp_path):
    path = write(tmp_path, "configs = 4\n")
    out = tmp_path / "o"
    assert cli.main(["check-props", "--config", path, "--out", str(out)]) == 0
    rows = read_csv(out / "props.csv")
    assert len(rows) == 16
    assert all(r["violated"] == "false" for r in rows)
    core = {r["suite"]: r for r in read_csv(out / "core_props.csv")}
    assert "transport_closed_vs_ode" in core
    assert float(core["transport_closed_vs_ode"]["max_residual"]) < 1e-6
    assert all(r["violated"] == "false" for r in core.values())


def test_check_props_negative_control(tmp_path):
    path = write(tmp_path, "configs = 4\n")
    out = tmp_path / "o"
    assert cli.main(["check-props", "--config", path, "--out", str(out), "--negative-control"]) == 1
    rows = read_csv(out / "props.csv")
    assert any(r["violated"] == "true" for r in rows)


def test_transport_command(capsys):
    assert cli.main(["transport", "--q", "0,1,1", "--p", "0,0,1", "--v", "0,1,0"]) == 0
    out = capsys.readouterr().out.splitlines()
    vals = [float(t) for t in out[0].split()[1:]]
    assert np.allclose(vals, [0, 0.6, 0.8], atol=1e-12)
    assert float(out[1].split()[1]) < 1e-6


def test_transport_bad_input():
    assert cli.main(["transport", "--q", "0,1", "--p", "0,0,1", "--v", "0,1,0"]) == 2
    assert cli.main(["transport", "--q", "0,1,-1", "--p", "0,0,1", "--v", "0,1,0"]) == 2
    assert cli.main(["transport", "--q", "a,b", "--p", "0,0,1", "--v", "0,1,0"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "alexlab", "transport", "--q", "0,0,2", "--p", "0,0,1",
                          "--v", "1,0,0"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("transported 0.5 0 0")
