"""Trajectory ensembles and their moment estimators.

Trajectories are processed in chunks, optionally on a thread pool. Every chunk writes
into index-ordered storage, and reductions run over the assembled arrays in ascending
trajectory index, so results depend only on the seed and the configuration.
"""

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
from scipy.stats import linregress

from kerrq.engine import KerrModel, integrate_batch, pathwise_batch
from kerrq.ensemble.initial import initial_batch
from kerrq.errors import EnsembleError
from kerrq.noise import noise_free_path, sample_noise_batch
from kerrq.types import (
    DivergenceRow,
    DivergenceTable,
    EnsembleConfig,
    InitialMode,
    MomentSeries,
    NoiseConfig,
    ProductMomentSeries,
    TrajectoryBatch,
)

logger = logging.getLogger(__name__)

MIN_DIVERGENCE_TRAJECTORIES = 100

Progress = Callable[[int], None]


def validate_config(cfg: EnsembleConfig) -> None:
    """Check an ensemble configuration.

    Raises:
        EnsembleError: If any field is outside its domain.
    """
    if cfg.n_trajectories < 1:
        raise EnsembleError(f"n_trajectories must be >= 1, got {cfg.n_trajectories}")
    if not cfg.t_final > 0:
        raise EnsembleError(f"t_final must be positive, got {cfg.t_final}")
    if not cfg.dt > 0:
        raise EnsembleError(f"dt must be positive, got {cfg.dt}")
    if cfg.record_stride < 1:
        raise EnsembleError(f"record_stride must be >= 1, got {cfg.record_stride}")
    if not cfg.divergence_threshold > 0:
        raise EnsembleError(
            f"divergence_threshold must be positive, got {cfg.divergence_threshold}"
        )
    if cfg.method not in ("exact", "heun"):
        raise EnsembleError(f"unknown method {cfg.method!r}")
    if cfg.workers < 1 or cfg.chunk_size < 1:
        raise EnsembleError("workers and chunk_size must be >= 1")


def _chunks(cfg: EnsembleConfig) -> list[tuple[int, int]]:
    per_chunk = max(1, min(cfg.chunk_size, cfg.max_chunk_elements // (cfg.n_steps + 1)))
    return [
        (first, min(per_chunk, cfg.n_trajectories - first))
        for first in range(0, cfg.n_trajectories, per_chunk)
    ]


def _run_chunk(
    model: KerrModel, cfg: EnsembleConfig, first: int, count: int
) -> TrajectoryBatch:
    noise_cfg = NoiseConfig(
        mu=model.mu,
        dt=cfg.dt,
        representation_sign=model.representation_sign,
        stream_seed=cfg.master_seed,
        trajectory_index=first,
    )
    if cfg.noise_free:
        path = noise_free_path(noise_cfg, cfg.n_steps, count)
    else:
        path = sample_noise_batch(noise_cfg, first, count, cfg.n_steps)
    alpha0 = initial_batch(cfg.initial_mode, cfg.master_seed, first, count)
    integrate = pathwise_batch if cfg.method == "exact" else integrate_batch
    return integrate(
        model, alpha0, np.conj(alpha0), path, cfg.divergence_threshold, cfg.record_steps
    )


def simulate(
    model: KerrModel, cfg: EnsembleConfig, progress: Progress | None = None
) -> TrajectoryBatch:
    """Integrate every trajectory of the ensemble on the record grid of ``cfg``."""
    validate_config(cfg)
    record_steps = cfg.record_steps
    n, r = cfg.n_trajectories, record_steps.size
    alpha = np.empty((n, r), dtype=np.complex128)
    alpha_plus = np.empty((n, r), dtype=np.complex128)
    divergence_step = np.empty(n, dtype=np.int64)

    chunks = _chunks(cfg)
    logger.info(
        "simulating %d trajectories x %d steps in %d chunks (%s)",
        n,
        cfg.n_steps,
        len(chunks),
        cfg.method,
    )

    def store(first: int, count: int, batch: TrajectoryBatch) -> None:
        alpha[first : first + count] = batch.alpha
        alpha_plus[first : first + count] = batch.alpha_plus
        divergence_step[first : first + count] = batch.divergence_step
        if progress is not None:
            progress(count)

    if cfg.workers == 1:
        for first, count in chunks:
            store(first, count, _run_chunk(model, cfg, first, count))
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            batches = pool.map(lambda fc: _run_chunk(model, cfg, *fc), chunks)
            for (first, count), batch in zip(chunks, batches):
                store(first, count, batch)

    return TrajectoryBatch(
        times=cfg.times,
        record_steps=record_steps,
        alpha=alpha,
        alpha_plus=alpha_plus,
        divergence_step=divergence_step,
        dt=cfg.dt,
    )


def _masked_mean(values: np.ndarray, alive: np.ndarray, n_alive: np.ndarray) -> np.ndarray:
    """Survivor mean per record, accumulated as offsets from the first survivor."""
    first = np.argmax(alive, axis=0)
    pivot = np.where(n_alive > 0, values[first, np.arange(values.shape[1])], 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return pivot + np.where(alive, values - pivot, 0).sum(axis=0) / n_alive


def _masked_var(
    values: np.ndarray, mean: np.ndarray, alive: np.ndarray, n_alive: np.ndarray
) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        spread = np.where(alive, values - mean, 0) ** 2
        return np.where(n_alive > 1, spread.sum(axis=0) / (n_alive - 1), np.nan)


def moment_series(batch: TrajectoryBatch) -> MomentSeries:
    """Per-time means over surviving trajectories with per-component standard errors."""
    alive = batch.alive
    n_alive = alive.sum(axis=0).astype(np.int64)
    mean = _masked_mean(batch.alpha, alive, n_alive)
    var_re = _masked_var(batch.alpha.real, mean.real, alive, n_alive)
    var_im = _masked_var(batch.alpha.imag, mean.imag, alive, n_alive)
    with np.errstate(invalid="ignore", divide="ignore"):
        stderr_re = np.sqrt(var_re / n_alive)
        stderr_im = np.sqrt(var_im / n_alive)
    product = _masked_mean(batch.alpha_plus * batch.alpha, alive, n_alive)

    empty = np.flatnonzero(n_alive == 0)
    truncated_at = float(batch.times[empty[0]]) if empty.size else None
    if truncated_at is not None:
        logger.warning("every trajectory diverged by t = %g; series truncated", truncated_at)
    elif n_alive[-1] < batch.n_trajectories:
        logger.info(
            "%d of %d trajectories diverged; estimates use survivors only",
            batch.n_trajectories - int(n_alive[-1]),
            batch.n_trajectories,
        )
    return MomentSeries(
        times=batch.times,
        mean_alpha=mean,
        stderr_re=stderr_re,
        stderr_im=stderr_im,
        mean_alphaplus_alpha=product,
        n_alive=n_alive,
        divergence_times=batch.divergence_times,
        n_trajectories=batch.n_trajectories,
        truncated_at=truncated_at,
    )


def run_ensemble(
    model: KerrModel, cfg: EnsembleConfig, progress: Progress | None = None
) -> MomentSeries:
    """Ensemble estimate of ``<alpha(t)>`` on the record grid."""
    return moment_series(simulate(model, cfg, progress))


def product_moments(batch: TrajectoryBatch) -> ProductMomentSeries:
    """Mean and variance of ``alpha_plus alpha`` with a least-squares trend on the variance."""
    alive = batch.alive
    n_alive = alive.sum(axis=0).astype(np.int64)
    product = batch.alpha_plus * batch.alpha
    mean = _masked_mean(product, alive, n_alive)
    variance = _masked_var(product.real, mean.real, alive, n_alive) + _masked_var(
        product.imag, mean.imag, alive, n_alive
    )
    with np.errstate(invalid="ignore", divide="ignore"):
        stderr = np.sqrt(variance / n_alive)

    usable = np.isfinite(variance) & (batch.times > 0)
    if usable.sum() >= 3 and np.ptp(variance[usable]) > 0:
        fit = linregress(batch.times[usable], variance[usable])
        slope, pvalue = float(fit.slope), float(fit.pvalue)
    else:
        slope, pvalue = 0.0, 1.0
    return ProductMomentSeries(
        times=batch.times,
        mean=mean,
        stderr=stderr,
        variance=variance,
        n_alive=n_alive,
        slope=slope,
        slope_pvalue=pvalue,
    )


def product_moment_series(
    model: KerrModel, cfg: EnsembleConfig, progress: Progress | None = None
) -> ProductMomentSeries:
    """Simulate an ensemble and estimate ``<alpha_plus alpha>`` and its spread over time.

    The mean should stay at ``beta_plus beta`` while the variance grows; the trend is a
    least-squares fit of the variance against time.
    """
    return product_moments(simulate(model, cfg, progress))


def divergence_statistics(
    model: KerrModel,
    betas: list[complex] | tuple[complex, ...],
    cfg: EnsembleConfig,
    progress: Progress | None = None,
) -> DivergenceTable:
    """Fraction diverged by ``t_final`` and median divergence time per start point.

    Every start point reuses the same noise streams. Trajectories that never diverge
    count as diverging at infinity, so the median is infinite when fewer than half do.

    Raises:
        EnsembleError: If fewer than 100 trajectories per start point are requested.
    """
    if cfg.n_trajectories < MIN_DIVERGENCE_TRAJECTORIES:
        raise EnsembleError(
            f"divergence statistics need >= {MIN_DIVERGENCE_TRAJECTORIES} trajectories "
            f"per beta, got {cfg.n_trajectories}"
        )
    rows = []
    for beta in betas:
        run_cfg = replace(
            cfg, initial_mode=InitialMode.fixed_beta(beta), record_stride=cfg.n_steps
        )
        batch = simulate(model, run_cfg, progress)
        times = np.where(batch.diverged, batch.divergence_step * cfg.dt, np.inf)
        rows.append(
            DivergenceRow(
                beta=complex(beta),
                fraction_diverged=float(batch.diverged.mean()),
                median_divergence_time=float(np.median(times)),
                n_trajectories=batch.n_trajectories,
            )
        )
        logger.info("beta=%s: %.1f%% diverged", beta, 100 * rows[-1].fraction_diverged)
    return DivergenceTable(
        t_final=cfg.t_final, threshold=cfg.divergence_threshold, rows=tuple(rows)
    )
