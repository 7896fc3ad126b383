"""Tests for the CSV, JSON-lines, manifest and grid writers."""

import csv
import json

import numpy as np
import pytest

from kerrq.analytic import coherent_state, q_function
from kerrq.io import dump_noise_csv, write_manifest, write_q_grid, write_table, write_trajectory
from kerrq.io.writers import schema_tag, split_complex
from kerrq.noise import sample_noise_batch, sample_noise_path
from kerrq.types import NoiseConfig, RunConfig, Trajectory


def _read_csv(path):
    with path.open(encoding="utf-8") as f:
        schema = f.readline().strip()
        rows = list(csv.reader(f))
    return schema, rows[0], rows[1:]


def test_csv_floats_read_back_exactly(tmp_path):
    values = np.array([0.1, 1 / 3, 1e-300, -2.5e17])
    path = write_table(tmp_path / "t.txt", "demo", {"x": values, "n": np.arange(4)})
    assert path.suffix == ".csv"
    schema, header, rows = _read_csv(path)
    assert schema == f"# schema={schema_tag('demo')}"
    assert header == ["x", "n"]
    assert [float(r[0]) for r in rows] == list(values)
    assert [r[1] for r in rows] == ["0", "1", "2", "3"]


def test_jsonl_header_and_null_for_nan(tmp_path):
    columns = {"t": np.array([0.0, 1.0]), "ok": np.array([True, False])}
    columns |= split_complex("z", np.array([1 + 2j, complex("nan")]))
    path = write_table(tmp_path / "t", "demo", columns, "jsonl")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert path.suffix == ".jsonl"
    assert json.loads(lines[0]) == {
        "schema": "kerrq.demo/1",
        "columns": ["t", "ok", "re_z", "im_z"],
    }
    assert json.loads(lines[1]) == {"t": 0.0, "ok": 1, "re_z": 1.0, "im_z": 2.0}
    assert json.loads(lines[2])["re_z"] is None


def test_mismatched_columns_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_table(tmp_path / "t", "demo", {"a": np.zeros(2), "b": np.zeros(3)})


def test_manifest_records_config_and_files(tmp_path):
    cfg = RunConfig(command="analytic", times=(0.0, 0.5), out=tmp_path)
    data = tmp_path / "analytic.csv"
    path = write_manifest(tmp_path, cfg, [data], {"error": 1e-15, "value": 1 + 1j})
    manifest = json.loads(path.read_text(encoding="utf-8"))
    assert manifest["schema"] == "kerrq.manifest/1"
    assert manifest["command"] == "analytic"
    assert manifest["seed"] == 42
    assert manifest["config"]["beta"] == "0.001+0.1i"
    assert manifest["config"]["times"] == [0.0, 0.5]
    assert manifest["files"] == ["analytic.csv"]
    assert manifest["results"]["value"] == "1.0+1.0i"


def test_q_grid_writes_table_and_array(tmp_path):
    grid = q_function(coherent_state(1.0), 3.0, 8)
    table, binary = write_q_grid(tmp_path / "qgrid_000", grid, 0.5)
    _, header, rows = _read_csv(table)
    assert header == ["x", "y", "q"]
    assert len(rows) == 64
    with np.load(binary) as data:
        np.testing.assert_array_equal(data["values"], grid.values)
        assert float(data["t"]) == 0.5
        assert tuple(data["shape"]) == (8, 8)
        assert "re_alpha" in str(data["units"])
        np.testing.assert_array_equal(data["corners"], [-3 - 3j, 3 + 3j])


def test_noise_dump(tmp_path):
    cfg = NoiseConfig(mu=1.0, dt=1e-3)
    path = dump_noise_csv(tmp_path / "noise", sample_noise_path(cfg, 5))
    _, header, rows = _read_csv(path)
    assert header[:3] == ["step", "re_eta", "im_eta"]
    assert len(rows) == 5


def test_noise_dump_rejects_batch(tmp_path):
    cfg = NoiseConfig(mu=1.0, dt=1e-3)
    with pytest.raises(ValueError):
        dump_noise_csv(tmp_path / "noise", sample_noise_batch(cfg, 0, 2, 5))


def test_trajectory_rows_carry_divergence_flag(tmp_path):
    nan = complex("nan")
    trajectory = Trajectory(
        times=np.array([0.0, 0.1, 0.2]),
        alpha=np.array([1 + 1j, nan, nan]),
        alpha_plus=np.array([1 - 1j, nan, nan]),
        divergence_time=0.1,
    )
    _, header, rows = _read_csv(write_trajectory(tmp_path / "traj", trajectory))
    assert header == ["t", "re_alpha", "im_alpha", "re_alpha_plus", "im_alpha_plus", "diverged"]
    assert [r[-1] for r in rows] == ["0", "1", "1"]


def test_surviving_trajectory_never_flagged(tmp_path):
    trajectory = Trajectory(np.array([0.0, 0.1]), np.array([1j, 2j]), np.array([-1j, -2j]))
    _, _, rows = _read_csv(write_trajectory(tmp_path / "traj", trajectory))
    assert [r[-1] for r in rows] == ["0", "0"]
