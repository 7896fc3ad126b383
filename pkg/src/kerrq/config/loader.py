"""Run configuration loading for kerrq.

Values come from, in increasing precedence: built-in defaults, a key=value config file
(read with python-dotenv), ``KERRQ_*`` environment variables and command-line flags.
Every value is parsed from text by the same per-key parser, so errors always name the
key, and for file values also the line.
"""

import logging
import math
import os
import re
from collections.abc import Callable, Mapping
from dataclasses import fields
from pathlib import Path
from typing import Any, get_args

import numpy as np
from dotenv import dotenv_values

from kerrq.errors import ConfigError
from kerrq.types import Command, RunConfig

logger = logging.getLogger(__name__)

ENV_PREFIX = "KERRQ_"
CONFIG_ENV = f"{ENV_PREFIX}CONFIG"

COMMANDS: tuple[Command, ...] = get_args(Command)
REQUIRED: dict[str, tuple[str, ...]] = {"analytic": ("times",), "qgrid": ("t",)}

_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_IMAGINARY = re.compile(rf"^([+-]?(?:{_NUMBER})?)[ij]$")
_COMPLEX = re.compile(rf"^([+-]?{_NUMBER})(?:([+-](?:{_NUMBER})?)[ij])?$")
_KEY_LINE = re.compile(r"^\s*(?:export\s+)?([A-Za-z_][A-Za-z0-9_.-]*)\s*(?:=|$)")


def parse_complex(text: str) -> complex:
    """Parse an ``a+bi`` literal: ``1``, ``-0.5i``, ``0.001+0.1i``, ``1e-3-2e-1i``.

    Raises:
        ValueError: If ``text`` is not such a literal.
    """
    text = text.strip()
    if match := _IMAGINARY.match(text):
        return complex(0.0, _coefficient(match[1]))
    if match := _COMPLEX.match(text):
        im_part = 0.0 if match[2] is None else _coefficient(match[2])
        return complex(float(match[1]), im_part)
    raise ValueError(f"not a complex literal: {text!r}")


def _coefficient(text: str) -> float:
    if text in ("", "+", "-"):
        return -1.0 if text == "-" else 1.0
    return float(text)


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse ``start:step:stop`` or a comma-separated list of times.

    The grid is ``start + k*step`` up to the point nearest ``stop``, so ``stop`` is
    included whenever it lies on the grid within half a step.

    Raises:
        ValueError: If the bounds are malformed or the step is not positive.
    """
    if ":" not in text:
        return tuple(float(v) for v in text.split(",") if v.strip())
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected start:step:stop, got {text!r}")
    start, step, stop = (float(p) for p in parts)
    if not step > 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"grid stop {stop} is before start {start}")
    k_max = math.floor((stop - start) / step + 0.5)
    return tuple(float(v) for v in start + step * np.arange(k_max + 1))


def _positive(cast: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(text: str) -> Any:
        value = cast(text)
        if not value > 0 or (isinstance(value, float) and not math.isfinite(value)):
            raise ValueError(f"must be positive, got {value}")
        return value

    return parse


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        value = text.strip().lower().replace("-", "_")
        if value not in options:
            raise ValueError(f"must be one of {', '.join(options)}, got {text!r}")
        return value

    return parse


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise ValueError(f"must be a 64-bit nonnegative integer, got {value}")
    return value


def _resolution(text: str) -> int:
    value = int(text)
    if value < 2:
        raise ValueError(f"must be at least 2, got {value}")
    return value


def _complex_list(text: str) -> tuple[complex, ...]:
    return tuple(parse_complex(v) for v in text.split(",") if v.strip())


def _positive_list(text: str) -> tuple[float, ...]:
    values = parse_grid(text)
    if any(v < 0 for v in values):
        raise ValueError("times must be nonnegative")
    return values


PARSERS: dict[str, Callable[[str], Any]] = {
    "mu": _positive(float),
    "representation": _choice("q", "positive_p"),
    "beta": parse_complex,
    "alpha0": parse_complex,
    "initial": _choice("fixed_beta", "sample_q0", "delta_positive_p"),
    "n_traj": _positive(int),
    "t_final": _positive(float),
    "dt": _positive(float),
    "stride": _positive(int),
    "threshold": _positive(float),
    "seed": _seed,
    "method": _choice("exact", "heun"),
    "workers": _positive(int),
    "chunk": _positive(int),
    "times": _positive_list,
    "t": _positive_list,
    "extent": _positive(float),
    "res": _resolution,
    "betas": _complex_list,
    "tolerance": _positive(float),
    "points": _positive(int),
    "out": Path,
    "format": _choice("csv", "jsonl"),
}


def normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def _parse_value(key: str, text: str, line: int | None = None) -> Any:
    try:
        return PARSERS[key](text)
    except (ValueError, TypeError) as e:
        raise ConfigError(key, str(e), line) from e


def _key_lines(path: Path) -> dict[str, int]:
    lines: dict[str, int] = {}
    for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        match = _KEY_LINE.match(raw)
        if match:
            lines[match[1]] = number
    return lines


def read_config_file(path: Path) -> tuple[dict[str, Any], dict[str, int]]:
    """Parse a key=value config file strictly.

    Returns:
        Parsed values by key, and the 1-based line each key was read from.

    Raises:
        ConfigError: If the file is unreadable, or a key is unknown, valueless or
            malformed.
    """
    if not path.is_file():
        raise ConfigError(None, f"config file not found: {path}")
    try:
        raw = dotenv_values(path, interpolate=False)
        lines = _key_lines(path)
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(None, f"cannot read config file {path}: {e}") from e

    values: dict[str, Any] = {}
    positions: dict[str, int] = {}
    for raw_key, text in raw.items():
        key = normalize_key(raw_key)
        line = lines.get(raw_key)
        if key not in PARSERS:
            raise ConfigError(raw_key, "unknown key", line)
        if text is None:
            raise ConfigError(key, "missing value", line)
        values[key] = _parse_value(key, text, line)
        positions[key] = line or 0
    return values, positions


def read_environment(environ: Mapping[str, str]) -> dict[str, Any]:
    """Values from ``KERRQ_<KEY>`` variables; unknown ``KERRQ_`` names are ignored."""
    values: dict[str, Any] = {}
    for name, text in environ.items():
        if not name.startswith(ENV_PREFIX) or name == CONFIG_ENV:
            continue
        key = normalize_key(name.removeprefix(ENV_PREFIX))
        if key not in PARSERS:
            logger.warning("ignoring unknown environment variable %s", name)
            continue
        values[key] = _parse_value(key, text)
    return values


def resolve_config(
    command: str | None,
    flags: Mapping[str, str | None],
    config_file: Path | None = None,
    environ: Mapping[str, str] | None = None,
) -> RunConfig:
    """Merge defaults, file, environment and flags into a validated ``RunConfig``.

    Args:
        command: Subcommand name
        flags: Raw flag text by key; ``None`` means the flag was not given
        config_file: Optional key=value file; falls back to ``$KERRQ_CONFIG``
        environ: Environment mapping, ``os.environ`` by default

    Raises:
        ConfigError: On a missing or unknown command, an unknown or malformed key, or a
            missing required key.
    """
    if command is None:
        raise ConfigError(None, "no command given")
    if command not in COMMANDS:
        raise ConfigError("command", f"unknown command {command!r}")
    environ = os.environ if environ is None else environ
    if config_file is None and environ.get(CONFIG_ENV):
        config_file = Path(environ[CONFIG_ENV])

    resolved: dict[str, Any] = {}
    sources = {f.name: "default" for f in fields(RunConfig) if f.name in PARSERS}

    if config_file is not None:
        file_values, _ = read_config_file(config_file)
        resolved |= file_values
        sources |= dict.fromkeys(file_values, f"file:{config_file}")

    env_values = read_environment(environ)
    resolved |= env_values
    sources |= dict.fromkeys(env_values, "env")

    for raw_key, text in flags.items():
        if text is None:
            continue
        key = normalize_key(raw_key)
        if key not in PARSERS:
            raise ConfigError(raw_key, "unknown key")
        resolved[key] = _parse_value(key, text)
        sources[key] = "flag"

    for key in REQUIRED.get(command, ()):
        if not resolved.get(key):
            raise ConfigError(key, f"required by {command}")

    logger.debug("resolved %s config from %s", command, sorted(set(sources.values())))
    return RunConfig(command=command, sources=sources, **resolved)
