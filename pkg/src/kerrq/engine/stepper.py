"""Stratonovich Heun integration of the Kerr SDEs."""

import logging

import numpy as np

from kerrq.engine.model import KerrModel
from kerrq.types import ComplexArray, NoisePath, PhasePoint, Trajectory, TrajectoryBatch

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 1e6


def _heun(
    model: KerrModel,
    alpha: ComplexArray,
    alpha_plus: ComplexArray,
    eta: ComplexArray,
    eta_plus: ComplexArray,
    dt: float,
) -> tuple[ComplexArray, ComplexArray]:
    b, bp = model.drift(alpha, alpha_plus)
    c, cp = model.noise_gain(alpha, alpha_plus)
    pred = alpha + b * dt + c * eta
    pred_plus = alpha_plus + bp * dt + cp * eta_plus

    b2, bp2 = model.drift(pred, pred_plus)
    c2, cp2 = model.noise_gain(pred, pred_plus)
    new = alpha + 0.5 * (b + b2) * dt + 0.5 * (c + c2) * eta
    new_plus = alpha_plus + 0.5 * (bp + bp2) * dt + 0.5 * (cp + cp2) * eta_plus
    return new, new_plus


def heun_step(
    model: KerrModel, point: PhasePoint, eta: tuple[complex, complex], dt: float
) -> PhasePoint:
    """One predictor-corrector step with the increments ``eta = (eta, eta_plus)``.

    Overflow yields a non-finite point (``point.is_finite`` is False) instead of raising.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        alpha, alpha_plus = _heun(
            model,
            np.complex128(point.alpha),
            np.complex128(point.alpha_plus),
            np.complex128(eta[0]),
            np.complex128(eta[1]),
            dt,
        )
    return PhasePoint(complex(alpha), complex(alpha_plus))


def _crossed(alpha: ComplexArray, alpha_plus: ComplexArray, threshold: float) -> np.ndarray:
    size = np.fmax(np.abs(alpha), np.abs(alpha_plus))
    return ~(size <= threshold)  # NaN counts as crossed


def integrate_batch(
    model: KerrModel,
    alpha0: ComplexArray,
    alpha_plus0: ComplexArray,
    path: NoisePath,
    divergence_threshold: float = DEFAULT_THRESHOLD,
    record_steps: np.ndarray | None = None,
) -> TrajectoryBatch:
    """Heun-integrate a batch of trajectories, one noise row per trajectory.

    Once ``max(|alpha|, |alpha_plus|)`` exceeds the threshold (or overflows) a trajectory
    is frozen at NaN and its divergence step recorded; it is never revived.
    """
    eta = np.atleast_2d(path.eta)
    eta_plus = np.atleast_2d(path.eta_plus)
    n_paths, n_steps = eta.shape
    if record_steps is None:
        record_steps = np.arange(n_steps + 1, dtype=np.int64)
    record_steps = np.asarray(record_steps, dtype=np.int64)
    dt = path.dt

    alpha = np.broadcast_to(np.asarray(alpha0, dtype=np.complex128), (n_paths,)).copy()
    alpha_plus = np.broadcast_to(np.asarray(alpha_plus0, dtype=np.complex128), (n_paths,)).copy()
    divergence_step = np.full(n_paths, -1, dtype=np.int64)
    out = np.full((n_paths, record_steps.size), np.nan, dtype=np.complex128)
    out_plus = np.full_like(out, np.nan)

    crossed = _crossed(alpha, alpha_plus, divergence_threshold)
    divergence_step[crossed] = 0
    alpha[crossed] = np.nan
    alpha_plus[crossed] = np.nan

    slot = 0
    if record_steps[0] == 0:
        out[:, 0], out_plus[:, 0] = alpha, alpha_plus
        slot = 1
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            alpha, alpha_plus = _heun(
                model, alpha, alpha_plus, eta[:, step - 1], eta_plus[:, step - 1], dt
            )
            crossed = _crossed(alpha, alpha_plus, divergence_threshold) & (divergence_step < 0)
            if crossed.any():
                divergence_step[crossed] = step
                alpha[crossed] = np.nan
                alpha_plus[crossed] = np.nan
            if slot < record_steps.size and record_steps[slot] == step:
                out[:, slot], out_plus[:, slot] = alpha, alpha_plus
                slot += 1

    times = record_steps.astype(np.float64) * dt
    phase = model.frame_phase(times)
    logger.debug("heun batch: %d of %d diverged", int((divergence_step >= 0).sum()), n_paths)
    return TrajectoryBatch(
        times=times,
        record_steps=record_steps,
        alpha=out * phase,
        alpha_plus=out_plus * np.conj(phase),
        divergence_step=divergence_step,
        dt=dt,
    )


def integrate_trajectory(
    model: KerrModel,
    initial: PhasePoint,
    path: NoisePath,
    divergence_threshold: float = DEFAULT_THRESHOLD,
) -> Trajectory:
    """Integrate one trajectory, sampled at every step of ``path``."""
    if not initial.is_finite:
        raise ValueError("initial phase point must be finite")
    batch = integrate_batch(
        model,
        np.array([initial.alpha]),
        np.array([initial.alpha_plus]),
        path,
        divergence_threshold,
    )
    return batch.trajectory(0)
