"""Terminal rendering of run summaries using rich.

Every command prints its headline numbers here; the full data always goes to files.
"""

import math
import sys
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    from typing import Unpack
else:
    from typing_extensions import Unpack

import numpy as np
from rich.console import Group
from rich.panel import Panel
from rich.rule import Rule
from rich.table import Table
from rich.text import Text

from kerrq.display.handles import cerr, cout
from kerrq.display.theme import ICONS
from kerrq.display.types import Cell, EchoKwargs
from kerrq.types import (
    AveragingOrderReport,
    ComplexArray,
    DiffusionReport,
    DivergenceTable,
    MomentSeries,
    ProductMomentSeries,
    QGridSummary,
    RealArray,
    RunConfig,
)

MAX_ROWS = 12


def echo(*objects: Any, **kwargs: Unpack[EchoKwargs]) -> None:
    """Shorthand for ``cout.print``"""
    cout.print(*objects, **kwargs)


def echo_err(
    msg: str,
    msg_sup: str | None = None,
    prefix: str = "Error:",
    then_exit_with: int | None = None,
    **kwargs: Unpack[EchoKwargs],
) -> None:
    """Prints error message (via ``cerr.print``)

    Args:
        msg: Error message to display
        msg_sup: Optional supplementary error message

    Optional Keyword Args:
        prefix: Prefix for error message
        then_exit_with: Call ``sys.exit`` with this code
    """
    msg_common = f"[status.error]{prefix}[/status.error] {msg}"
    errmsg = (
        msg_common
        if msg_sup is None
        else f"{msg_common}\n [status.error]>[/status.error] {msg_sup}"
    )

    cerr.print(errmsg, **kwargs)
    if then_exit_with is not None:
        sys.exit(then_exit_with)


def _get_display_width() -> int:
    """Calculate consistent display width for all elements.

    Returns:
        Display width in characters.
    """
    terminal_width = cout.width
    if terminal_width >= 120:
        return min(100, terminal_width - 20)
    if terminal_width >= 80:
        return terminal_width - 10
    return terminal_width - 4


def _create_section_header(title: str, icon: str | None = None) -> Rule:
    """Create a consistent section header with horizontal rule.

    Args:
        title: Section title
        icon: Optional icon prefix

    Returns:
        Rich Rule object.
    """
    text = f"{icon} {title}" if icon else title
    return Rule(text, style="heading.primary", align="left")


def _verdict(ok: bool, yes: str = "pass", no: str = "fail", flag: bool = False) -> Text:
    """Styled pass/fail cell.

    Args:
        ok: Outcome of the check
        yes: Text shown when ``ok``
        no: Text shown otherwise
        flag: Style a failure as a warning rather than an error

    Returns:
        Rich Text object.
    """
    if ok:
        return Text(yes, style="verdict.pass")
    return Text(no, style="verdict.flag" if flag else "verdict.fail")


def _num(value: float, spec: str = ".4g") -> str:
    """Format a float, spelling out non-finite values."""
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, spec)


def _cplx(value: complex, spec: str = ".6f") -> str:
    """Format a complex number as ``a+bi``."""
    value = complex(value)
    sign = "-" if value.imag < 0 else "+"
    return f"{_num(value.real, spec)}{sign}{_num(abs(value.imag), spec)}i"


def _table(*headers: str) -> Table:
    """Create a results table, first column as labels, the rest right-aligned values.

    Args:
        headers: Column titles

    Returns:
        Rich Table object.
    """
    table = Table(
        show_header=True,
        header_style="table.header",
        border_style="border.accent",
        width=_get_display_width(),
        show_edge=False,
        pad_edge=False,
    )
    table.add_column(headers[0], style="label", no_wrap=True)
    for header in headers[1:]:
        table.add_column(header, justify="right", style="value")
    return table


def _row_indices(n: int, max_rows: int = MAX_ROWS) -> list[int]:
    """At most ``max_rows`` evenly spread indices, always including the last."""
    if n <= max_rows:
        return list(range(n))
    return sorted({round(i) for i in np.linspace(0, n - 1, max_rows)})


def _section(title: str, icon_key: str, body: Any, border: str = "border.default") -> None:
    """Print a section header followed by ``body`` in a panel.

    Args:
        title: Section title
        icon_key: Key into ``ICONS``
        body: Any rich renderable
        border: Theme style of the panel border
    """
    echo(_create_section_header(title, ICONS.get(icon_key)))
    echo(Panel(body, border_style=border, width=_get_display_width(), padding=(0, 1)))
    echo()


def _key_values(pairs: Sequence[tuple[str, Cell]]) -> Table:
    """Two-column label/value grid."""
    grid = Table.grid(padding=(0, 2))
    grid.add_column(style="label", no_wrap=True)
    grid.add_column(style="value")
    for key, value in pairs:
        grid.add_row(key, value)
    return grid


def display_config(cfg: RunConfig) -> None:
    """Resolved parameters that matter for ``cfg.command``."""
    manifest = cfg.to_manifest()
    common = ["mu", "representation", "seed"]
    per_command = {
        "simulate": ["beta", "initial", "n_traj", "t_final", "dt", "stride", "method"],
        "analytic": ["alpha0", "times", "tolerance"],
        "compare": ["alpha0", "n_traj", "t_final", "dt", "stride", "method"],
        "fpcheck": ["points"],
        "qgrid": ["alpha0", "t", "extent", "res"],
        "diverge": ["betas", "n_traj", "t_final", "dt", "threshold", "method"],
    }
    keys = common + per_command[cfg.command] + ["out", "format"]
    pairs = []
    for key in keys:
        value = manifest[key]
        if isinstance(value, list) and len(value) > 6:
            value = f"{value[0]} .. {value[-1]} ({len(value)} values)"
        source = cfg.sources.get(key, "default")
        pairs.append((key, Text.assemble(str(value), (f"  [{source}]", "border.default"))))
    _section(f"kerrq {cfg.command}", "config", _key_values(pairs))


def display_moments(
    series: MomentSeries, reference: ComplexArray | None = None, reference_name: str = "analytic"
) -> None:
    """Ensemble mean of ``alpha`` over time, with z-scores against ``reference``."""
    headers = ["t", "<alpha>", "stderr", "n_alive"]
    if reference is not None:
        headers[2:2] = [reference_name, "z"]
        z = series.z_scores(reference)
    table = _table(*headers)
    for i in _row_indices(series.times.size):
        row: list[Cell] = [_num(series.times[i]), _cplx(series.mean_alpha[i])]
        if reference is not None:
            z_text = _num(z[i], ".2f")
            row += [_cplx(reference[i]), _verdict(z[i] <= 4.0, z_text, z_text)]
        row += [_num(series.stderr_alpha[i], ".2e"), str(series.n_alive[i])]
        table.add_row(*row)

    body: list[Any] = [table]
    if series.truncated_at is not None:
        message = f"every trajectory diverged by t = {series.truncated_at:g}"
        body.append(Text(message, "verdict.fail"))
    elif series.bias_warning.any():
        diverged = series.n_trajectories - int(series.n_alive[-1])
        body.append(
            Text(
                f"{diverged} of {series.n_trajectories} trajectories diverged; "
                "means use survivors only (biased)",
                "verdict.flag",
            )
        )
    _section("Ensemble mean", "moments", Group(*body))


def display_product(series: ProductMomentSeries, expected: complex) -> None:
    """Display the product moment with its variance trend.

    Args:
        series: Product moment estimates
        expected: Analytic value the mean should stay at
    """
    table = _table("t", "<alpha+ alpha>", "stderr", "variance")
    for i in _row_indices(series.times.size):
        table.add_row(
            _num(series.times[i]),
            _cplx(series.mean[i]),
            _num(series.stderr[i], ".2e"),
            _num(series.variance[i], ".4e"),
        )
    trend = Text.assemble(
        ("variance trend: ", "label"),
        f"slope {series.slope:.4g}, p = {series.slope_pvalue:.3g}  ",
        _verdict(series.variance_increasing, "increasing", "not increasing", flag=True),
        ("  expected mean: ", "label"),
        _cplx(expected),
    )
    _section("Conserved product moment", "moments", Group(table, trend))


def display_analytic(times: RealArray, series: Mapping[str, ComplexArray]) -> None:
    """Display closed-form means, one column per entry of ``series``."""
    table = _table("t", *series)
    for i in _row_indices(len(times)):
        table.add_row(_num(times[i]), *(_cplx(values[i]) for values in series.values()))
    _section("Closed-form means", "analytic", table)


def display_averaging_report(report: AveragingOrderReport) -> None:
    """Display the order-of-averaging comparison.

    Args:
        report: Fixed-start and Q0-sampled ensembles with their analytic references
    """
    blowup = "none observed" if report.q0_blowup_time is None else f"t = {report.q0_blowup_time:g}"
    pairs = [
        ("alpha0", _cplx(report.alpha0, ".4g")),
        (
            "fixed start vs re-summed mean",
            f"agrees within 4 stderr up to t = {report.agreement_horizon:g}",
        ),
        ("Q0-sampled divergence fraction", _num(report.q0_divergence_fraction, ".3%")),
        ("Q0-sampled estimator breakdown", blowup),
        (
            "initial-average-first series vs exact",
            Text.assemble(
                f"max |error| = {report.ordered_max_error:.2e}  ",
                _verdict(report.ordered_max_error < 1e-10),
            ),
        ),
    ]
    table = _table("t", "fixed", "re-summed", "Q0-sampled", "exact", "n_alive")
    for i in _row_indices(report.times.size):
        table.add_row(
            _num(report.times[i]),
            _cplx(report.fixed_beta.mean_alpha[i], ".4f"),
            _cplx(report.resummed[i], ".4f"),
            _cplx(report.q0_sampled.mean_alpha[i], ".4f"),
            _cplx(report.exact[i], ".4f"),
            str(report.q0_sampled.n_alive[i]),
        )
    _section("Order of averaging", "compare", Group(_key_values(pairs), Text(), table))


def display_fp_check(
    residuals: Mapping[str, float], diffusion: DiffusionReport, tolerance: float
) -> None:
    """Display the Fokker-Planck round trip.

    Args:
        residuals: Max relative residual per coefficient
        diffusion: Per-point negative-diffusion results
        tolerance: Residual below which a coefficient passes
    """
    table = _table("coefficient", "max relative residual", "")
    for name, value in residuals.items():
        table.add_row(name, _num(value, ".3e"), _verdict(value < tolerance))
    worst = max(residuals.values())
    n_negative = sum(point.negative for point in diffusion.points)
    summary = Text.assemble(
        ("max residual: ", "label"),
        f"{worst:.3e}  ",
        ("negative diffusion: ", "label"),
        f"{n_negative}/{len(diffusion.points)} points  ",
        _verdict(diffusion.negative),
    )
    _section("Fokker-Planck round trip", "fpcheck", Group(table, summary))


def display_qgrid(summaries: Sequence[QGridSummary]) -> None:
    table = _table("t", "maxima", "integral of Q", "cat fidelity")
    for s in summaries:
        fidelity = "-" if s.cat_fidelity is None else f"{s.cat_fidelity:.12f}"
        table.add_row(
            _num(s.t, ".6g"),
            ", ".join(_cplx(m, ".4f") for m in s.maxima),
            f"{s.total:.6f}",
            fidelity,
        )
    _section("Q function", "qgrid", table)


def display_divergence(table: DivergenceTable) -> None:
    """Display divergence fractions and median times, smallest start point first."""
    out = _table("beta", "|beta|^2", "fraction diverged", "median divergence time")
    for row in sorted(table.rows, key=lambda r: abs(r.beta)):
        out.add_row(
            _cplx(row.beta, ".4g"),
            _num(abs(row.beta) ** 2),
            _num(row.fraction_diverged, ".1%"),
            _num(row.median_divergence_time),
        )
    trend = Text.assemble(
        ("median non-increasing in |beta|^2: ", "label"),
        _verdict(table.median_non_increasing, "yes", "no", flag=True),
        f"  (T = {table.t_final:g}, threshold = {table.threshold:g})",
    )
    _section("Divergence statistics", "diverge", Group(out, trend))


def display_files(paths: Sequence[Path]) -> None:
    body = Group(*(Text(str(p), style="value") for p in paths))
    _section("Output files", "files", body, border="border.success")
