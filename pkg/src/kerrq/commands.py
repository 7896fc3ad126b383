"""Command dispatch for kerrq.

Each command turns a resolved ``RunConfig`` into library calls, prints a summary and
writes its data files. Nothing numeric is computed here beyond picking columns.
"""

import logging
import math
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np

from kerrq.analytic import (
    cat_state,
    fidelity,
    fock_evolve,
    mean_a_exact,
    period,
    positive_p_stochastic_average,
    q_function,
    q_function_maxima,
    reduce_time,
    resummed_phase_curve,
    resummed_q0_integrability,
    stochastic_average_resummed,
)
from kerrq.display import (
    display_analytic,
    display_averaging_report,
    display_divergence,
    display_fp_check,
    display_moments,
    display_product,
    display_qgrid,
)
from kerrq.engine import (
    KerrModel,
    fp_from_langevin,
    fp_round_trip_residuals,
    kerr_langevin,
    negative_diffusion_check,
)
from kerrq.ensemble import (
    Progress,
    analytic_series,
    averaging_order_experiment,
    divergence_statistics,
    moment_series,
    product_moments,
    simulate,
)
from kerrq.errors import KerrqError
from kerrq.io import (
    write_analytic_series,
    write_averaging_report,
    write_divergence_table,
    write_fp_residuals,
    write_manifest,
    write_moment_series,
    write_phase_plane,
    write_product_series,
    write_q_grid,
    write_table,
    write_trajectory,
)
from kerrq.io.writers import split_complex
from kerrq.types import EnsembleConfig, InitialMode, QGridSummary, RunConfig

logger = logging.getLogger(__name__)

FP_TOLERANCE = 1e-12
CAT_TIME_TOLERANCE = 1e-6
SAMPLE_TRAJECTORIES = 4

Results = dict[str, Any]


class RunOutputs:
    """Files written by one run, removed again if the run fails.

    The output directory is listed up front, so a failing writer's half-written files
    are found even before they are registered with ``add``.
    """

    def __init__(self, out_dir: Path) -> None:
        self.out_dir = out_dir
        self.files: list[Path] = []
        self._created_dir = not out_dir.exists()
        self._existing = set(out_dir.iterdir()) if out_dir.is_dir() else set()

    def path(self, stem: str) -> Path:
        return self.out_dir / stem

    def add(self, written: Path | list[Path]) -> None:
        self.files.extend(written if isinstance(written, list) else [written])

    def remove_all(self) -> None:
        strays = set()
        if self.out_dir.is_dir():
            strays = {p for p in self.out_dir.iterdir() if p.is_file()} - self._existing
        removed = set(self.files) | strays
        for path in removed:
            path.unlink(missing_ok=True)
        if self._created_dir and self.out_dir.is_dir() and not any(self.out_dir.iterdir()):
            self.out_dir.rmdir()
        logger.info("removed %d partial output files", len(removed))
        self.files.clear()


def initial_mode(cfg: RunConfig) -> InitialMode:
    match cfg.initial:
        case "sample_q0":
            return InitialMode.sample_q0(cfg.alpha0)
        case "delta_positive_p":
            return InitialMode.delta_positive_p(cfg.alpha0)
        case _:
            return InitialMode.fixed_beta(cfg.beta)


def ensemble_config(cfg: RunConfig, mode: InitialMode | None = None) -> EnsembleConfig:
    return EnsembleConfig(
        n_trajectories=cfg.n_traj,
        initial_mode=mode or initial_mode(cfg),
        t_final=cfg.t_final,
        dt=cfg.dt,
        record_stride=cfg.stride,
        divergence_threshold=cfg.threshold,
        master_seed=cfg.seed,
        method=cfg.method,
        chunk_size=cfg.chunk,
        workers=cfg.workers,
    )


def _overlay(model: KerrModel, mode: InitialMode, times: np.ndarray) -> dict[str, np.ndarray]:
    """Analytic curves to print next to the ensemble mean of ``simulate``."""
    point, mu = mode.point, model.mu
    stochastic = stochastic_average_resummed if model.is_q else positive_p_stochastic_average
    curves = {"exact": np.array([mean_a_exact(point, mu, t) for t in times])}
    if mode.kind != "sample_q0":
        curves["stochastic"] = np.array([stochastic(point, mu, t) for t in times])
    return curves


def run_simulate(cfg: RunConfig, outputs: RunOutputs, progress: Progress | None) -> Results:
    model = KerrModel.for_representation(cfg.mu, cfg.representation)
    ens = ensemble_config(cfg)
    batch = simulate(model, ens, progress)
    series = moment_series(batch)
    product = product_moments(batch)
    overlay = _overlay(model, ens.initial_mode, series.times)

    reference = overlay.get("stochastic", overlay["exact"])
    display_moments(series, reference, "stochastic" if "stochastic" in overlay else "exact")
    # Q0 sampling adds the unit variance of the start point
    spread = 1.0 if ens.initial_mode.kind == "sample_q0" else 0.0
    display_product(product, complex(abs(ens.initial_mode.point) ** 2 + spread))

    outputs.add(write_moment_series(outputs.path("moments"), series, overlay, cfg.format))
    outputs.add(write_product_series(outputs.path("product_moments"), product, cfg.format))
    curve = resummed_phase_curve(ens.initial_mode.point, cfg.mu, cfg.points)
    outputs.add(write_phase_plane(outputs.path("phase_plane"), series, curve, cfg.format))
    for i in range(min(SAMPLE_TRAJECTORIES, batch.n_trajectories)):
        path = outputs.path(f"trajectory_{i:04d}")
        outputs.add(write_trajectory(path, batch.trajectory(i), cfg.format))

    z = series.z_scores(reference)
    return {
        "n_diverged": int(batch.diverged.sum()),
        "truncated_at": series.truncated_at,
        "max_z": float(np.nanmax(z)) if np.isfinite(z).any() else None,
        "variance_increasing": product.variance_increasing,
    }


def run_analytic(cfg: RunConfig, outputs: RunOutputs, progress: Progress | None) -> Results:
    times = np.asarray(cfg.times, dtype=np.float64)
    series = analytic_series(cfg.alpha0, cfg.mu, times, cfg.tolerance)
    display_analytic(times, {k: series[k] for k in ("exact", "resummed", "ordered")})
    outputs.add(write_analytic_series(outputs.path("analytic"), times, series, cfg.format))

    diagnoses = [resummed_q0_integrability(cfg.alpha0, cfg.mu, t) for t in times]

    def column(name: str) -> np.ndarray:
        values = [getattr(d, name) for d in diagnoses]
        return np.array([complex("nan") if v is None else v for v in values])

    integrability = {
        "t": times,
        "integrable": np.array([d.integrable for d in diagnoses]),
        "cos_2mut": np.array([d.cos_2mut for d in diagnoses]),
        **split_complex("quadrature", column("quadrature_value")),
        **split_complex("closed_form", column("closed_form_value")),
    }
    outputs.add(
        write_table(outputs.path("integrability"), "integrability", integrability, cfg.format)
    )
    max_error = float(np.max(np.abs(series["ordered"] - series["exact"]), initial=0.0))
    return {
        "period": period(cfg.mu),
        "ordered_max_error": max_error,
        "fock_max_error": float(np.max(np.abs(series["fock"] - series["exact"]), initial=0.0)),
        "unbounded_times": int(sum(not d.integrable for d in diagnoses)),
    }


def run_compare(cfg: RunConfig, outputs: RunOutputs, progress: Progress | None) -> Results:
    ens = ensemble_config(cfg, InitialMode.fixed_beta(cfg.alpha0))
    report = averaging_order_experiment(cfg.alpha0, cfg.mu, ens, progress)
    display_averaging_report(report)
    outputs.add(write_averaging_report(outputs.path("compare"), report, cfg.format))
    return {
        "agreement_horizon": report.agreement_horizon,
        "q0_divergence_fraction": report.q0_divergence_fraction,
        "q0_blowup_time": report.q0_blowup_time,
        "ordered_max_error": report.ordered_max_error,
    }


def run_fpcheck(cfg: RunConfig, outputs: RunOutputs, progress: Progress | None) -> Results:
    model = KerrModel.for_representation(cfg.mu, cfg.representation)
    residuals = fp_round_trip_residuals(model, n_points=cfg.points, seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    radius = 3.0 * np.sqrt(rng.random(cfg.points)) + 1e-3
    samples = radius * np.exp(2j * np.pi * rng.random(cfg.points))
    diffusion = negative_diffusion_check(fp_from_langevin(kerr_langevin(model)), samples)

    display_fp_check(residuals, diffusion, FP_TOLERANCE)
    outputs.add(write_fp_residuals(outputs.path("fpcheck"), residuals, diffusion, cfg.format))
    return {
        "max_residual": max(residuals.values()),
        "residuals_ok": max(residuals.values()) < FP_TOLERANCE,
        "negative_diffusion": diffusion.negative,
    }


def run_qgrid(cfg: RunConfig, outputs: RunOutputs, progress: Progress | None) -> Results:
    cat_time = period(cfg.mu) / 4.0
    summaries = []
    for i, t in enumerate(cfg.t):
        psi = fock_evolve(cfg.alpha0, cfg.mu, t)
        grid = q_function(psi, cfg.extent, cfg.res)
        maxima = q_function_maxima(psi, grid, n_peaks=2)
        cat_fidelity = None
        if math.isclose(reduce_time(cfg.mu, t), cat_time, abs_tol=CAT_TIME_TOLERANCE):
            cat_fidelity = fidelity(psi, cat_state(cfg.alpha0, psi.n_max))
        summaries.append(QGridSummary(t, tuple(maxima), grid.integrate().real, cat_fidelity))
        outputs.add(write_q_grid(outputs.path(f"qgrid_{i:03d}"), grid, t, cfg.format))
    display_qgrid(summaries)
    return {
        "grids": [
            {"t": s.t, "maxima": list(s.maxima), "total": s.total, "cat_fidelity": s.cat_fidelity}
            for s in summaries
        ]
    }


def run_diverge(cfg: RunConfig, outputs: RunOutputs, progress: Progress | None) -> Results:
    model = KerrModel.for_representation(cfg.mu, cfg.representation)
    table = divergence_statistics(model, cfg.betas, ensemble_config(cfg), progress)
    display_divergence(table)
    outputs.add(write_divergence_table(outputs.path("divergence"), table, cfg.format))
    return {
        "median_non_increasing": table.median_non_increasing,
        "median_strictly_decreasing": table.median_strictly_decreasing,
    }


COMMANDS: dict[str, Callable[[RunConfig, RunOutputs, Progress | None], Results]] = {
    "simulate": run_simulate,
    "analytic": run_analytic,
    "compare": run_compare,
    "fpcheck": run_fpcheck,
    "qgrid": run_qgrid,
    "diverge": run_diverge,
}


def execute(cfg: RunConfig, progress: Progress | None = None) -> list[Path]:
    """Run ``cfg.command`` and write its files plus ``manifest.json`` under ``cfg.out``.

    Returns:
        Every file written, manifest last.

    Raises:
        KerrqError: From the library, or wrapping an ``OSError`` from the writers. Files
            already written are removed first.
    """
    outputs = RunOutputs(cfg.out)
    try:
        results = COMMANDS[cfg.command](cfg, outputs, progress)
        manifest = write_manifest(cfg.out, cfg, outputs.files, results)
    except OSError as e:
        outputs.remove_all()
        raise KerrqError(f"cannot write outputs under {cfg.out}: {e}") from e
    except BaseException:
        outputs.remove_all()
        raise
    return [*outputs.files, manifest]
