"""Tests for configuration parsing: literals, grids, files, environment and precedence."""

from pathlib import Path

import pytest

from kerrq.config import parse_complex, parse_grid, read_config_file, resolve_config
from kerrq.errors import ConfigError
from kerrq.types import RunConfig, format_complex

# ==================================================================================
# Literals
# ==================================================================================


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("1", 1 + 0j),
        ("-2.5", -2.5 + 0j),
        ("-0.5i", -0.5j),
        ("2i", 2j),
        ("i", 1j),
        ("0.001+0.1i", complex(0.001, 0.1)),
        ("1e-3-2e-1i", complex(0.001, -0.2)),
        ("2-i", complex(2.0, -1.0)),
        (" 3+4j ", complex(3.0, 4.0)),
    ],
)
def test_parse_complex(text, expected):
    assert parse_complex(text) == expected


@pytest.mark.parametrize("text", ["", "abc", "1+2", "1+2i+3", "i1"])
def test_parse_complex_rejects(text):
    with pytest.raises(ValueError):
        parse_complex(text)


@pytest.mark.parametrize("value", [complex(0.001, 0.1), complex(-1.5, -0.0), complex(1e-17, 3)])
def test_formatted_complex_reads_back_exactly(value):
    assert parse_complex(format_complex(value)) == value


def test_parse_grid_inclusive():
    assert parse_grid("0:0.25:1") == (0.0, 0.25, 0.5, 0.75, 1.0)
    grid = parse_grid("0:0.01:6.3")
    assert len(grid) == 631
    assert grid[-1] == pytest.approx(6.3)


def test_parse_grid_list():
    assert parse_grid("0, 1.5,2") == (0.0, 1.5, 2.0)


@pytest.mark.parametrize("text", ["0:0:1", "1:0.1:0", "0:1", "a:b:c"])
def test_parse_grid_rejects(text):
    with pytest.raises(ValueError):
        parse_grid(text)


# ==================================================================================
# Resolution
# ==================================================================================


def test_defaults_are_recorded():
    cfg = resolve_config("simulate", {}, environ={})
    assert cfg == RunConfig(command="simulate")
    assert cfg.sources["dt"] == "default"
    manifest = cfg.to_manifest()
    assert manifest["dt"] == 1e-4
    assert manifest["beta"] == "0.001+0.1i"


def test_flags_are_parsed():
    cfg = resolve_config(
        "simulate",
        {"mu": "1", "beta": "0.001+0.1i", "n_traj": "50000", "t_final": "1", "dt": "1e-4"},
        environ={},
    )
    assert cfg.beta == complex(0.001, 0.1)
    assert cfg.n_traj == 50000
    assert cfg.sources["beta"] == "flag"


def test_precedence_flag_over_env_over_file(tmp_path):
    config = tmp_path / "run.env"
    config.write_text("seed=1\nmu=2.0\ndt=1e-3\n", encoding="utf-8")
    cfg = resolve_config(
        "simulate",
        {"seed": "3"},
        config_file=config,
        environ={"KERRQ_SEED": "2", "KERRQ_MU": "4"},
    )
    assert (cfg.seed, cfg.mu, cfg.dt) == (3, 4.0, 1e-3)
    assert cfg.sources["seed"] == "flag"
    assert cfg.sources["mu"] == "env"
    assert cfg.sources["dt"] == f"file:{config}"


def test_config_file_from_environment(tmp_path):
    config = tmp_path / "run.env"
    config.write_text("n-traj = 10\n", encoding="utf-8")
    cfg = resolve_config("simulate", {}, environ={"KERRQ_CONFIG": str(config)})
    assert cfg.n_traj == 10


def test_unknown_environment_variable_ignored():
    cfg = resolve_config("simulate", {}, environ={"KERRQ_BOGUS": "1", "OTHER": "x"})
    assert cfg == RunConfig(command="simulate")


@pytest.mark.parametrize("command", [None, "plot"])
def test_missing_or_unknown_command(command):
    with pytest.raises(ConfigError):
        resolve_config(command, {}, environ={})


@pytest.mark.parametrize(("command", "key"), [("analytic", "times"), ("qgrid", "t")])
def test_missing_required_key(command, key):
    with pytest.raises(ConfigError) as info:
        resolve_config(command, {}, environ={})
    assert info.value.key == key


@pytest.mark.parametrize(
    ("key", "text"),
    [
        ("dt", "-1"),
        ("mu", "0"),
        ("n_traj", "1.5"),
        ("representation", "wigner"),
        ("seed", "-3"),
        ("res", "1"),
        ("times", "-1,2"),
        ("format", "xml"),
    ],
)
def test_invalid_flag_names_key(key, text):
    with pytest.raises(ConfigError) as info:
        resolve_config("simulate", {key: text}, environ={})
    assert info.value.key == key
    assert key in str(info.value)


# ==================================================================================
# Config files
# ==================================================================================


def test_file_values_and_lines(tmp_path):
    config = tmp_path / "run.env"
    config.write_text("# short run\nmu=1\n\nbeta=0.001+0.1i\n", encoding="utf-8")
    values, lines = read_config_file(config)
    assert values == {"mu": 1.0, "beta": complex(0.001, 0.1)}
    assert lines == {"mu": 2, "beta": 4}


def test_unknown_file_key_reports_line(tmp_path):
    config = tmp_path / "run.env"
    config.write_text("mu=1\n# comment\nbogus=3\n", encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        read_config_file(config)
    assert (info.value.key, info.value.line) == ("bogus", 3)
    assert "line 3" in str(info.value)


def test_malformed_file_value_reports_line(tmp_path):
    config = tmp_path / "run.env"
    config.write_text("mu=1\nn_traj=abc\n", encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        read_config_file(config)
    assert (info.value.key, info.value.line) == ("n_traj", 2)


def test_valueless_file_key(tmp_path):
    config = tmp_path / "run.env"
    config.write_text("mu\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="missing value"):
        read_config_file(config)


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        read_config_file(Path("/nonexistent/kerrq.env"))
