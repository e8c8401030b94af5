"""Command-line runs: outputs, determinism and exit codes."""

import json
from pathlib import Path

import numpy as np
import pytest

from momentindex import __version__
from momentindex.cli import main
from momentindex.raster import RegionMask

CONFIG = """
[run]
max_order = 12
pixels = 96
angle_count = 90

[measures.m]
kind = "circle-uniform"

[measures.half]
kind = "circle-uniform"
radius = "1/2"

[measures.tri]
kind = "atomic"
points = [["1", "1"], ["i", "1"], ["-1", "1"]]

[measures.h]
kind = "circle-density"
coefficients = ["1", "1/2"]

[[analysis]]
command = "indices"
mu1 = "half"
mu2 = "m"

[[analysis]]
command = "pc-hull"
measure = "m"

[[analysis]]
command = "hull"
measure = "tri"

[[analysis]]
command = "density-test"
measure = "half"
grid = [["0", "1/2"], ["0", "1"]]
"""


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(CONFIG)
    return path


def run(*args):
    return main([str(a) for a in args])


def test_run_writes_tables_rasters_and_summary(config, tmp_path):
    out = tmp_path / "out"
    assert run("run", "--config", config, "--out", out) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["version"] == __version__
    assert summary["defaults"]["max_order"] == 40
    assert summary["settings"]["max_order"] == 12
    assert "window" in summary["thresholds"]
    commands = [a["command"] for a in summary["analyses"]]
    assert commands == ["indices", "pc-hull", "hull", "density-test"]
    table = (out / "00-indices-indices.csv").read_text().splitlines()
    assert table[0] == "# subcommand: indices"
    assert table[1] == "order [1],lambda_n [ratio],beta_n [ratio]"
    assert len(table) == 2 + 13
    assert summary["analyses"][3]["verdict"].startswith("polynomials NOT dense")
    rle = json.loads((out / "01-pc-hull-pc-hull.rle.json").read_text())
    mask = RegionMask.from_rle(rle)
    pgm = RegionMask.from_pgm((out / "01-pc-hull-pc-hull.pgm").read_bytes(),
                              mask.xmin, mask.ymax, mask.resolution)
    assert np.array_equal(mask.grid, pgm.grid)
    assert mask.contains(np.array([0j, 0.5 + 0.5j])).all()


def test_reruns_are_byte_identical(config, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("run", "--config", config, "--out", a) == 0
    assert run("run", "--config", config, "--out", b) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_subcommand_with_measures_on_command_line(config, tmp_path):
    out = tmp_path / "o"
    assert run("indices", "--config", config, "--mu1", "m", "--mu2", "h",
               "--max-order", "6", "--format", "json", "--out", out) == 0
    doc = json.loads((out / "00-indices-indices.json").read_text())
    assert doc["subcommand"] == "indices" and len(doc["rows"]) == 7
    assert doc["columns"][1] == {"name": "lambda_n", "unit": "ratio"}


@pytest.mark.parametrize("command", ["moments", "radius", "christoffel", "numrange", "invariance",
                                     "pushforward"])
def test_every_single_measure_subcommand_runs(config, tmp_path, command):
    assert run(command, "--config", config, "--measure", "h", "--max-order", "5",
               "--out", tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["analyses"][0]["command"] == command


def test_containment_subcommand(config, tmp_path):
    assert run("containment", "--config", config, "--mu1", "half", "--mu2", "m",
               "--out", tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["analyses"][0]["verdict"] == "holds"


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('[measures.a]\nkind = "circle-uniform"\nradius = "-2"\n')
    assert run("run", "--config", bad, "--out", tmp_path / "x") == 2
    assert "measures.a" in capsys.readouterr().err
    assert not (tmp_path / "x").exists()


def test_unknown_measure_on_command_line(config, tmp_path, capsys):
    assert run("hull", "--config", config, "--measure", "zz", "--out", tmp_path) == 2
    assert "unknown measure 'zz'" in capsys.readouterr().err


def test_numerical_failure_exit_code(config, tmp_path, capsys):
    # three atoms cannot carry a positive definite section of order 3
    assert run("indices", "--config", config, "--mu1", "m", "--mu2", "tri",
               "--out", tmp_path) == 3
    assert "order 3" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert run("run", "--config", tmp_path / "none.toml") == 2


def test_indices_table_for_half_circle(config, tmp_path):
    assert run("indices", "--config", config, "--mu1", "half", "--mu2", "m", "--max-order", "20",
               "--out", tmp_path) == 0
    rows = (tmp_path / "00-indices-indices.csv").read_text().splitlines()[2:]
    lam = [float(r.split(",")[1]) for r in rows]
    assert lam == [4.0**-n for n in range(21)]


def test_hull_boundary_radius_for_circle(config, tmp_path):
    assert run("hull", "--config", config, "--measure", "m", "--max-order", "10",
               "--out", tmp_path) == 0
    lines = (tmp_path / "00-hull-boundaries.csv").read_text().splitlines()
    assert lines[1] == "size [1],theta [rad],re [z],im [z]"
    pts = np.array([[float(x) for x in line.split(",")] for line in lines[2:]])
    radius = np.hypot(pts[:, 2], pts[:, 3]).max()
    assert radius == pytest.approx(np.cos(np.pi / 11), abs=1e-12)


def test_thread_count_does_not_change_results(config, tmp_path, monkeypatch):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("run", "--config", config, "--out", a) == 0
    monkeypatch.setenv("MOMENTINDEX_THREADS", "4")
    assert run("run", "--config", config, "--out", b) == 0
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes()
