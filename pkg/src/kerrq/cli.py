import logging
import os
from argparse import Namespace
from collections.abc import Mapping
from pathlib import Path

from rich.logging import RichHandler
from rich_argparse import RichHelpFormatter

from kerrq import __version__
from kerrq.commands import execute
from kerrq.config import COMMANDS, PARSERS, resolve_config
from kerrq.display import ArgParser, cerr, cout, display_config, display_files, echo_err
from kerrq.errors import ConfigError, KerrqError
from kerrq.types import RunConfig

RichHelpFormatter.styles = {
    "argparse.args": "cyan",
    "argparse.groups": "bold green",
    "argparse.prog": "cyan",
    "argparse.metavar": "cyan",
    "argparse.help": "default",
    "argparse.text": "default",
}

EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_INTERRUPT = 130

ENSEMBLE = ("simulate", "compare", "diverge")
SEEDED = (*ENSEMBLE, "fpcheck")

# key -> (help text, commands taking the flag)
FLAGS: dict[str, tuple[str, tuple[str, ...]]] = {
    "mu": ("Kerr coupling mu > 0", COMMANDS),
    "representation": ("q or positive_p", ("simulate", "fpcheck", "diverge")),
    "seed": ("Master seed of every random stream", SEEDED),
    "beta": ("Fixed start point, a+bi", ("simulate",)),
    "alpha0": (
        "Coherent amplitude of the initial state, a+bi",
        ("simulate", "analytic", "compare", "qgrid"),
    ),
    "initial": ("fixed_beta, sample_q0 or delta_positive_p", ("simulate",)),
    "n_traj": ("Trajectories per ensemble", ENSEMBLE),
    "t_final": ("Integration horizon", ENSEMBLE),
    "dt": ("Integration step", ENSEMBLE),
    "stride": ("Record every this many steps", ENSEMBLE),
    "threshold": ("Divergence threshold on |alpha| and |alpha+|", ENSEMBLE),
    "method": ("exact (pathwise solution) or heun", ENSEMBLE),
    "workers": ("Threads running trajectory chunks", ENSEMBLE),
    "chunk": ("Trajectories per chunk", ENSEMBLE),
    "times": ("Time grid, start:step:stop or a comma list", ("analytic",)),
    "t": ("Times for Q-function grids, start:step:stop or a comma list", ("qgrid",)),
    "extent": ("Half-width of the Q-function grid", ("qgrid",)),
    "res": ("Grid points per axis", ("qgrid",)),
    "betas": ("Comma-separated start points, a+bi", ("diverge",)),
    "tolerance": ("Relative truncation tolerance of series", ("analytic",)),
    "points": (
        "Sample points (fpcheck) or phase-curve points (simulate)",
        ("simulate", "fpcheck"),
    ),
}

COMMAND_HELP = {
    "simulate": "Run a trajectory ensemble and compare its mean with the closed forms",
    "analytic": "Tabulate the closed-form means on a time grid",
    "compare": "Contrast fixed-start and Q0-sampled ensembles (order of averaging)",
    "fpcheck": "Check the Langevin to Fokker-Planck mapping of the Kerr coefficients",
    "qgrid": "Sample the Q function of the evolved state",
    "diverge": "Measure divergence fractions and times over start points",
}


def _add_common(parser: ArgParser) -> None:
    parser.add_argument("-h", "--help", action="help", help="Show this help message & exit")
    parser.add_argument("--config", type=Path, metavar="FILE", help="key=value config file")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--format", help="csv or jsonl")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="More log output (-v info, -vv debug)"
    )


def make_arg_parser() -> ArgParser:
    parser = ArgParser(
        prog="kerrq",
        description="Stochastic phase-space simulation of the Kerr oscillator",
        formatter_class=RichHelpFormatter,
        add_help=False,
    )
    parser.add_argument("-h", "--help", action="help", help="Show this help message & exit")
    parser.add_argument(
        "-V",
        "--version",
        action="version",
        version=f"[cyan]%(prog)s[/cyan] [green]v{__version__}[/green]",
        help="Show current program version & exit",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=ArgParser)
    for command, help_text in COMMAND_HELP.items():
        sub = subparsers.add_parser(
            command,
            help=help_text,
            description=help_text,
            formatter_class=RichHelpFormatter,
            add_help=False,
        )
        _add_common(sub)
        for key, (flag_help, commands) in FLAGS.items():
            if command in commands:
                sub.add_argument(f"--{key.replace('_', '-')}", dest=key, help=flag_help)
    return parser


def config_from_args(args: Namespace, environ: Mapping[str, str] | None = None) -> RunConfig:
    """Resolve parsed arguments against config file, environment and defaults.

    Raises:
        ConfigError: If the command is missing or any value is invalid.
    """
    flags = {key: getattr(args, key, None) for key in PARSERS}
    return resolve_config(args.command, flags, getattr(args, "config", None), environ)


def parse_config(
    argv: list[str] | None = None, environ: Mapping[str, str] | None = None
) -> RunConfig:
    """Command line (plus file and environment) to a validated ``RunConfig``."""
    return config_from_args(make_arg_parser().parse_args(argv), environ)


def configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=cerr, show_path=False, rich_tracebacks=True)],
        force=True,
    )


def run(argv: list[str] | None = None) -> None:
    """Stochastic phase-space simulation of the Kerr oscillator.

    Commands:

    - simulate:  trajectory ensemble with analytic overlay columns
    - analytic:  closed-form means on a time grid
    - compare:   order-of-averaging experiment
    - fpcheck:   Fokker-Planck round trip of the Kerr coefficients
    - qgrid:     Q function of the evolved state
    - diverge:   divergence statistics over start points

    Exit codes: 0 success, 2 configuration error, 3 runtime error, 130 interrupted.

    Examples:
      kerrq simulate --mu 1 --beta 0.001+0.1i --n-traj 50000 --t-final 1 --dt 1e-4 --seed 42
      kerrq analytic --alpha0 1 --mu 1 --times 0:0.01:6.3
      kerrq qgrid --alpha0 3 --mu 1 --t 1.5707963 --extent 6 --res 256
    """
    try:
        parser = make_arg_parser()
        args = parser.parse_args(argv)
        configure_logging(getattr(args, "verbose", 0))
        cfg = config_from_args(args, os.environ)
        display_config(cfg)

        done = 0
        label = f"[green]Running {cfg.command} [/green]"
        with cout.status(label, spinner="bouncingBar") as status:

            def progress(count: int) -> None:
                nonlocal done
                done += count
                status.update(f"{label}({done} trajectories)")

            files = execute(cfg, progress)

        display_files(files)

    except ConfigError as e:
        echo_err("invalid configuration", str(e), then_exit_with=EXIT_CONFIG)
    except KerrqError as e:
        echo_err("run failed", str(e), then_exit_with=EXIT_RUNTIME)
    except Exception as e:
        echo_err("unexpected error", str(e), then_exit_with=EXIT_RUNTIME)
    except KeyboardInterrupt:
        echo_err("keyboard interrupt raised", prefix="!", then_exit_with=EXIT_INTERRUPT)
