"""Run configuration: config files, environment variables and flag values."""

from kerrq.config.loader import (
    COMMANDS,
    ENV_PREFIX,
    PARSERS,
    parse_complex,
    parse_grid,
    read_config_file,
    read_environment,
    resolve_config,
)

__all__ = [
    "COMMANDS",
    "ENV_PREFIX",
    "PARSERS",
    "parse_complex",
    "parse_grid",
    "read_config_file",
    "read_environment",
    "resolve_config",
]
