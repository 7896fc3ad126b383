"""Display and formatting modules for kerrq."""

from kerrq.display.arg_parser import ArgParser
from kerrq.display.handles import cerr, cout
from kerrq.display.output import (
    display_analytic,
    display_averaging_report,
    display_config,
    display_divergence,
    display_files,
    display_fp_check,
    display_moments,
    display_product,
    display_qgrid,
    echo,
    echo_err,
)

__all__ = [
    "ArgParser",
    "cerr",
    "cout",
    "display_analytic",
    "display_averaging_report",
    "display_config",
    "display_divergence",
    "display_files",
    "display_fp_check",
    "display_moments",
    "display_product",
    "display_qgrid",
    "echo",
    "echo_err",
]
