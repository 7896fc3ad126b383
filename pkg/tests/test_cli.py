"""End-to-end tests of the kerrq command line."""

import csv
import json
import math

import pytest

from kerrq import commands
from kerrq.cli import EXIT_CONFIG, EXIT_RUNTIME, make_arg_parser, parse_config, run
from kerrq.errors import ConfigError, KerrqError


def _rows(path):
    with path.open(encoding="utf-8") as f:
        f.readline()
        return list(csv.DictReader(f))


def _manifest(out):
    return json.loads((out / "manifest.json").read_text(encoding="utf-8"))


def _exit_code(argv):
    with pytest.raises(SystemExit) as info:
        run(argv)
    return info.value.code


# ==================================================================================
# Parsing
# ==================================================================================


def test_long_run_flags():
    cfg = parse_config(
        "simulate --mu 1 --beta 0.001+0.1i --n-traj 50000 --t-final 1 --dt 1e-4 --seed 42".split(),
        environ={},
    )
    assert cfg.command == "simulate"
    assert cfg.beta == complex(0.001, 0.1)
    assert (cfg.n_traj, cfg.t_final, cfg.dt, cfg.seed) == (50000, 1.0, 1e-4, 42)


def test_negative_dt_names_key():
    with pytest.raises(ConfigError) as info:
        parse_config(["simulate", "--dt", "-1"], environ={})
    assert info.value.key == "dt"


def test_empty_command_is_config_error():
    with pytest.raises(ConfigError):
        parse_config([], environ={})


def test_flags_are_scoped_to_commands():
    parser = make_arg_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["analytic", "--n-traj", "10"])


# ==================================================================================
# Exit codes
# ==================================================================================


def test_usage_errors_exit_2(tmp_path):
    assert _exit_code([]) == EXIT_CONFIG
    assert _exit_code(["simulate", "--dt", "-1", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert _exit_code(["simulate", "--bogus", "1"]) == EXIT_CONFIG
    assert _exit_code(["analytic", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert not any(tmp_path.iterdir())


def test_runtime_error_exits_3(tmp_path):
    code = _exit_code(["diverge", "--n-traj", "10", "--out", str(tmp_path)])
    assert code == EXIT_RUNTIME


def test_failed_run_removes_partial_outputs(tmp_path, monkeypatch):
    def fail(*args, **kwargs):
        raise KerrqError("disk full")

    monkeypatch.setattr(commands, "write_phase_plane", fail)
    argv = ["simulate", "--n-traj", "8", "--t-final", "0.01", "--dt", "1e-3"]
    assert _exit_code([*argv, "--out", str(tmp_path)]) == EXIT_RUNTIME
    assert not any(tmp_path.iterdir())


def test_failed_second_file_of_a_writer_is_cleaned_up(tmp_path, monkeypatch):
    def fail(*args, **kwargs):
        raise OSError("no space left on device")

    monkeypatch.setattr("kerrq.io.writers.np.savez", fail)
    argv = ["qgrid", "--alpha0", "1", "--t", "0", "--res", "8", "--out", str(tmp_path)]
    assert _exit_code(argv) == EXIT_RUNTIME
    assert not any(tmp_path.iterdir())


def test_failed_run_removes_the_directory_it_created(tmp_path, monkeypatch):
    def fail(*args, **kwargs):
        raise OSError("read-only file system")

    monkeypatch.setattr(commands, "write_trajectory", fail)
    out = tmp_path / "fresh"
    argv = ["simulate", "--n-traj", "8", "--t-final", "0.01", "--dt", "1e-3"]
    assert _exit_code([*argv, "--out", str(out)]) == EXIT_RUNTIME
    assert not out.exists()


# ==================================================================================
# Commands
# ==================================================================================


def test_analytic_writes_periodic_series(tmp_path):
    two_pi = repr(2 * math.pi)
    argv = ["analytic", "--alpha0", "1", "--mu", "1", "--times", f"0,0.5,{two_pi}"]
    run([*argv, "--out", str(tmp_path)])
    rows = _rows(tmp_path / "analytic.csv")
    assert len(rows) == 3
    assert float(rows[0]["re_exact"]) == pytest.approx(float(rows[2]["re_exact"]), abs=1e-12)
    assert float(rows[1]["re_ordered"]) == pytest.approx(float(rows[1]["re_exact"]), abs=1e-10)

    manifest = _manifest(tmp_path)
    assert manifest["command"] == "analytic"
    assert manifest["config"]["sources"]["times"] == "flag"
    assert manifest["config"]["dt"] == 1e-4
    assert set(manifest["files"]) == {"analytic.csv", "integrability.csv"}
    assert manifest["results"]["ordered_max_error"] < 1e-10


def test_simulate_is_reproducible(tmp_path):
    argv = ["simulate", "--n-traj", "50", "--t-final", "0.05", "--dt", "1e-3", "--stride", "10"]
    run([*argv, "--out", str(tmp_path / "a")])
    run([*argv, "--out", str(tmp_path / "b")])

    first = (tmp_path / "a" / "moments.csv").read_bytes()
    assert first == (tmp_path / "b" / "moments.csv").read_bytes()
    rows = _rows(tmp_path / "a" / "moments.csv")
    assert len(rows) == 6
    assert {"re_exact", "im_stochastic", "stderr_re", "n_alive"} <= set(rows[0])
    assert (tmp_path / "a" / "trajectory_0003.csv").exists()
    assert {row["diverged"] for row in _rows(tmp_path / "a" / "trajectory_0003.csv")} == {"0"}
    assert "product_moments.csv" in _manifest(tmp_path / "a")["files"]


def test_simulate_jsonl(tmp_path):
    argv = ["simulate", "--n-traj", "8", "--t-final", "0.01", "--dt", "1e-3", "--stride", "5"]
    run([*argv, "--format", "jsonl", "--out", str(tmp_path)])
    lines = (tmp_path / "moments.jsonl").read_text(encoding="utf-8").splitlines()
    assert json.loads(lines[0])["schema"] == "kerrq.moments/1"
    assert len(lines) == 4


def test_fpcheck(tmp_path):
    run(["fpcheck", "--points", "20", "--out", str(tmp_path)])
    results = _manifest(tmp_path)["results"]
    assert results["residuals_ok"]
    assert results["negative_diffusion"]
    assert (tmp_path / "fpcheck_diffusion.csv").exists()


def test_qgrid_at_cat_time(tmp_path):
    argv = ["qgrid", "--alpha0", "3", "--mu", "1", "--t", "1.5707963", "--extent", "6"]
    run([*argv, "--res", "64", "--out", str(tmp_path)])
    (grid,) = _manifest(tmp_path)["results"]["grids"]
    assert grid["cat_fidelity"] >= 1.0 - 1e-9
    assert len(grid["maxima"]) == 2
    assert (tmp_path / "qgrid_000.npz").exists()
    assert len(_rows(tmp_path / "qgrid_000.csv")) == 64 * 64


def test_config_file_drives_run(tmp_path):
    config = tmp_path / "run.env"
    config.write_text("times=0:0.5:1\nalpha0=0.5-0.5i\n", encoding="utf-8")
    out = tmp_path / "out"
    run(["analytic", "--config", str(config), "--out", str(out)])
    manifest = _manifest(out)
    assert manifest["config"]["alpha0"] == "0.5-0.5i"
    assert manifest["config"]["sources"]["times"] == f"file:{config}"
    assert len(_rows(out / "analytic.csv")) == 3
