"""Data-file writers for kerrq.

Every table file starts with a schema line (``# schema=kerrq.<name>/<version>`` in CSV,
a ``{"schema": ...}`` object in JSON-lines). Complex values are split into ``re_`` and
``im_`` columns and floats are written with ``repr`` so they read back bit-exactly.
"""

import csv
import json
import logging
import math
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import numpy as np

from kerrq import __version__
from kerrq.types import (
    AveragingOrderReport,
    ComplexArray,
    DiffusionReport,
    DivergenceTable,
    MomentSeries,
    NoisePath,
    OutputFormat,
    ProductMomentSeries,
    QGrid,
    RunConfig,
    Trajectory,
    format_complex,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
Q_UNITS = "x=re_alpha y=im_alpha values=1/area"

Columns = Mapping[str, np.ndarray]


def schema_tag(name: str) -> str:
    return f"kerrq.{name}/{SCHEMA_VERSION}"


def split_complex(name: str, values: ComplexArray) -> dict[str, np.ndarray]:
    """``{"re_<name>": ..., "im_<name>": ...}`` for a complex column."""
    values = np.asarray(values, dtype=np.complex128)
    return {f"re_{name}": values.real, f"im_{name}": values.imag}


def _cell(value: Any) -> Any:
    if isinstance(value, (str, np.str_)):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    return float(value)


def _csv_text(value: Any) -> str:
    value = _cell(value)
    return repr(value) if isinstance(value, float) else str(value)


def _json_value(value: Any) -> Any:
    value = _cell(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_table(path: Path, name: str, columns: Columns, fmt: OutputFormat = "csv") -> Path:
    """Write equal-length columns as one table.

    Args:
        path: Target path; its suffix is replaced by ``.csv`` or ``.jsonl``
        name: Schema name recorded in the first line
        columns: Column name to 1-D array, in output order
        fmt: ``csv`` or ``jsonl``

    Returns:
        The path actually written.

    Raises:
        ValueError: If the columns differ in length.
    """
    lengths = {len(v) for v in columns.values()}
    if len(lengths) > 1:
        raise ValueError(f"columns of {name} differ in length: {sorted(lengths)}")
    n_rows = lengths.pop() if lengths else 0
    names = list(columns)
    arrays = [np.asarray(columns[k]) for k in names]

    path = path.with_suffix(".csv" if fmt == "csv" else ".jsonl")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        if fmt == "csv":
            f.write(f"# schema={schema_tag(name)}\n")
            w = csv.writer(f, lineterminator="\n")
            w.writerow(names)
            for i in range(n_rows):
                w.writerow([_csv_text(a[i]) for a in arrays])
        else:
            header = {"schema": schema_tag(name), "columns": names}
            f.write(json.dumps(header) + "\n")
            for i in range(n_rows):
                row = {k: _json_value(a[i]) for k, a in zip(names, arrays)}
                f.write(json.dumps(row, allow_nan=False) + "\n")
    logger.debug("wrote %d rows of %s to %s", n_rows, name, path)
    return path


def write_manifest(
    out_dir: Path, cfg: RunConfig, files: list[Path], results: Mapping[str, Any] | None = None
) -> Path:
    """Record the resolved configuration and the files a run produced."""
    payload = {
        "schema": schema_tag("manifest"),
        "version": __version__,
        "command": cfg.command,
        "seed": cfg.seed,
        "config": cfg.to_manifest(),
        "files": [p.name for p in files],
        "results": dict(results or {}),
    }
    path = out_dir / "manifest.json"
    out_dir.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, default=_json_default)
        f.write("\n")
    return path


def _json_default(obj: Any) -> Any:
    if isinstance(obj, complex):
        return format_complex(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def moment_columns(
    series: MomentSeries, overlay: Mapping[str, ComplexArray] | None = None
) -> dict[str, np.ndarray]:
    columns: dict[str, np.ndarray] = {"t": series.times}
    columns |= split_complex("mean_alpha", series.mean_alpha)
    columns["stderr_re"] = series.stderr_re
    columns["stderr_im"] = series.stderr_im
    columns |= split_complex("mean_alphaplus_alpha", series.mean_alphaplus_alpha)
    columns["n_alive"] = series.n_alive
    columns["bias_warning"] = series.bias_warning
    for name, values in (overlay or {}).items():
        columns |= split_complex(name, values)
    return columns


def write_moment_series(
    path: Path,
    series: MomentSeries,
    overlay: Mapping[str, ComplexArray] | None = None,
    fmt: OutputFormat = "csv",
) -> Path:
    """Ensemble means with optional analytic curves alongside."""
    return write_table(path, "moments", moment_columns(series, overlay), fmt)


def write_product_series(
    path: Path, series: ProductMomentSeries, fmt: OutputFormat = "csv"
) -> Path:
    """Write ``t``, the mean of ``alpha_plus alpha``, its standard error and variance.

    Args:
        path: Target path, suffix replaced by the format
        series: Product moment estimates
        fmt: ``csv`` or ``jsonl``

    Returns:
        The path actually written.
    """
    columns = {"t": series.times}
    columns |= split_complex("mean", series.mean)
    columns |= {"stderr": series.stderr, "variance": series.variance, "n_alive": series.n_alive}
    return write_table(path, "product_moments", columns, fmt)


def write_analytic_series(
    path: Path, times: np.ndarray, series: Mapping[str, ComplexArray], fmt: OutputFormat = "csv"
) -> Path:
    columns: dict[str, np.ndarray] = {"t": np.asarray(times)}
    for name, values in series.items():
        columns |= split_complex(name, values)
    return write_table(path, "analytic", columns, fmt)


def write_divergence_table(path: Path, table: DivergenceTable, fmt: OutputFormat = "csv") -> Path:
    """One row per start point: ``beta``, fraction diverged and median divergence time."""
    rows = table.rows
    columns = {
        "beta_re": np.array([r.beta.real for r in rows]),
        "beta_im": np.array([r.beta.imag for r in rows]),
        "fraction": np.array([r.fraction_diverged for r in rows]),
        "median_time": np.array([r.median_divergence_time for r in rows]),
        "n_trajectories": np.array([r.n_trajectories for r in rows]),
    }
    return write_table(path, "divergence", columns, fmt)


def write_averaging_report(
    path: Path, report: AveragingOrderReport, fmt: OutputFormat = "csv"
) -> Path:
    """Both ensembles and all three analytic curves on the common time grid."""
    fixed, sampled = report.fixed_beta, report.q0_sampled
    columns: dict[str, np.ndarray] = {"t": report.times}
    columns |= split_complex("fixed_mean", fixed.mean_alpha)
    columns |= {"fixed_stderr_re": fixed.stderr_re, "fixed_stderr_im": fixed.stderr_im}
    columns |= split_complex("resummed", report.resummed)
    columns |= split_complex("sampled_mean", sampled.mean_alpha)
    columns |= {"sampled_stderr_re": sampled.stderr_re, "sampled_stderr_im": sampled.stderr_im}
    columns["sampled_n_alive"] = sampled.n_alive
    columns |= split_complex("exact", report.exact)
    columns |= split_complex("ordered", report.ordered)
    return write_table(path, "averaging_order", columns, fmt)


def write_fp_residuals(
    path: Path,
    residuals: Mapping[str, float],
    diffusion: DiffusionReport,
    fmt: OutputFormat = "csv",
) -> list[Path]:
    """Residual per coefficient, plus the per-point negative-diffusion table."""
    names = list(residuals)
    columns = {
        "coefficient": np.array(names),
        "max_relative_residual": np.array([residuals[k] for k in names]),
    }
    table = write_table(path, "fp_residuals", columns, fmt)
    points = write_table(
        path.with_name(path.stem + "_diffusion"),
        "fp_diffusion",
        {
            **split_complex("alpha", np.array([p.alpha for p in diffusion.points])),
            **split_complex("d_cross", np.array([p.d_cross for p in diffusion.points])),
            "abs_d_self": np.array([p.d_abs_self for p in diffusion.points]),
            "negative": np.array([p.negative for p in diffusion.points]),
        },
        fmt,
    )
    return [table, points]


def write_q_grid(path: Path, grid: QGrid, t: float, fmt: OutputFormat = "csv") -> list[Path]:
    """Long-format table ``(x, y, q)`` plus an ``.npz`` with the 2-D array and its axes.

    The ``.npz`` header carries ``corners``, ``shape`` (rows = y, columns = x), ``units``,
    ``t`` and the schema tag.
    """
    xx, yy = np.meshgrid(grid.x, grid.y)
    table = write_table(
        path, "qgrid", {"x": xx.ravel(), "y": yy.ravel(), "q": grid.values.ravel()}, fmt
    )
    binary = path.with_suffix(".npz")
    lower, upper = grid.corners
    np.savez(
        binary,
        x=grid.x,
        y=grid.y,
        values=grid.values,
        corners=np.array([lower, upper]),
        shape=np.array(grid.values.shape, dtype=np.int64),
        units=np.str_(Q_UNITS),
        t=np.float64(t),
        schema=np.str_(schema_tag("qgrid")),
    )
    return [table, binary]


def dump_noise_csv(path: Path, noise: NoisePath) -> Path:
    """Debug dump of one noise path: per-step increments and their running sums."""
    if noise.is_batch:
        raise ValueError("dump_noise_csv takes a single path, not a batch")
    columns: dict[str, np.ndarray] = {"step": np.arange(1, noise.n_steps + 1)}
    columns |= split_complex("eta", noise.eta)
    columns |= split_complex("eta_plus", noise.eta_plus)
    columns |= split_complex("cum_xi", noise.cum_xi)
    columns |= split_complex("cum_xi_plus", noise.cum_xi_plus)
    return write_table(path, "noise", columns, "csv")


def write_trajectory(path: Path, trajectory: Trajectory, fmt: OutputFormat = "csv") -> Path:
    """One trajectory per row of the record grid, with a per-row ``diverged`` flag."""
    columns: dict[str, np.ndarray] = {"t": trajectory.times}
    columns |= split_complex("alpha", trajectory.alpha)
    columns |= split_complex("alpha_plus", trajectory.alpha_plus)
    columns["diverged"] = trajectory.diverged_mask
    return write_table(path, "trajectory", columns, fmt)


def write_phase_plane(
    path: Path, series: MomentSeries, curve: ComplexArray, fmt: OutputFormat = "csv"
) -> list[Path]:
    """Ensemble mean in the complex plane next to the closed analytic curve."""
    columns = {"t": series.times, **split_complex("mean_alpha", series.mean_alpha)}
    mean = write_table(path, "phase_plane", columns, fmt)
    reference = write_table(
        path.with_name(path.stem + "_reference"),
        "phase_plane_reference",
        {"index": np.arange(len(curve)), **split_complex("resummed", curve)},
        fmt,
    )
    return [mean, reference]
