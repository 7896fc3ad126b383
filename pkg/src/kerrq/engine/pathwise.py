"""Pathwise closed-form solution of the Kerr SDEs for a given noise realization.

``alpha_plus alpha`` obeys a linear SDE driven by ``xi + xi_plus``, so it is a plain
exponential of the cumulative noise. Substituting it back leaves linear equations for
``alpha`` and ``alpha_plus`` whose solutions only need the running noise sums and one
time integral, evaluated here with the trapezoid rule on the step grid.
"""

import numpy as np

from kerrq.engine.model import KerrModel
from kerrq.engine.stepper import DEFAULT_THRESHOLD
from kerrq.types import ComplexArray, NoisePath, PhasePoint, Trajectory, TrajectoryBatch


def _with_origin(cum: ComplexArray) -> ComplexArray:
    zeros = np.zeros((*cum.shape[:-1], 1), dtype=np.complex128)
    return np.concatenate([zeros, cum], axis=-1)


def _solve(
    model: KerrModel,
    alpha0: ComplexArray,
    alpha_plus0: ComplexArray,
    path: NoisePath,
) -> tuple[ComplexArray, ComplexArray]:
    """Simulated-frame ``alpha`` and ``alpha_plus`` on grid points ``0..n_steps``."""
    both = _with_origin(np.atleast_2d(path.cum_sum_both))
    xi = _with_origin(np.atleast_2d(path.cum_xi))
    xi_plus = _with_origin(np.atleast_2d(path.cum_xi_plus))
    number0 = (alpha_plus0 * alpha0)[:, np.newaxis]

    rate = -2j * model.mu * (number0 * np.exp(both) - 1.0)
    # trapezoid rule for int_0^t rate dt'
    panels = 0.5 * (rate[:, :-1] + rate[:, 1:]) * path.dt
    phase = _with_origin(np.cumsum(panels, axis=-1))

    alpha = alpha0[:, np.newaxis] * np.exp(phase + xi)
    alpha_plus = alpha_plus0[:, np.newaxis] * np.exp(-phase + xi_plus)
    return alpha, alpha_plus


def pathwise_batch(
    model: KerrModel,
    alpha0: ComplexArray,
    alpha_plus0: ComplexArray,
    path: NoisePath,
    divergence_threshold: float = DEFAULT_THRESHOLD,
    record_steps: np.ndarray | None = None,
) -> TrajectoryBatch:
    """Closed-form trajectories for every noise row of ``path``, with divergence marking."""
    n_paths = np.atleast_2d(path.eta).shape[0]
    alpha0 = np.broadcast_to(np.asarray(alpha0, dtype=np.complex128), (n_paths,))
    alpha_plus0 = np.broadcast_to(np.asarray(alpha_plus0, dtype=np.complex128), (n_paths,))
    if record_steps is None:
        record_steps = np.arange(path.n_steps + 1, dtype=np.int64)
    record_steps = np.asarray(record_steps, dtype=np.int64)

    with np.errstate(over="ignore", invalid="ignore"):
        alpha, alpha_plus = _solve(model, alpha0, alpha_plus0, path)
        size = np.fmax(np.abs(alpha), np.abs(alpha_plus))
    crossed = ~(size <= divergence_threshold)
    diverged = crossed.any(axis=1)
    divergence_step = np.where(diverged, crossed.argmax(axis=1), -1).astype(np.int64)

    alpha = alpha[:, record_steps]
    alpha_plus = alpha_plus[:, record_steps]
    dead = diverged[:, np.newaxis] & (record_steps[np.newaxis, :] >= divergence_step[:, np.newaxis])
    alpha[dead] = np.nan
    alpha_plus[dead] = np.nan

    times = record_steps.astype(np.float64) * path.dt
    phase = model.frame_phase(times)
    return TrajectoryBatch(
        times=times,
        record_steps=record_steps,
        alpha=alpha * phase,
        alpha_plus=alpha_plus * np.conj(phase),
        divergence_step=divergence_step,
        dt=path.dt,
    )


def pathwise_exact_solution(
    model: KerrModel,
    beta: complex,
    path: NoisePath,
    t_index: int,
    beta_plus: complex | None = None,
) -> PhasePoint:
    """``(alpha, alpha_plus)`` at step ``t_index`` of a single noise path.

    Starts from ``(beta, conj(beta))`` unless ``beta_plus`` is given. Overflow gives a
    non-finite point.
    """
    if path.is_batch:
        raise ValueError("pathwise_exact_solution takes a single noise path")
    if not 0 <= t_index <= path.n_steps:
        raise IndexError(f"t_index {t_index} outside 0..{path.n_steps}")
    beta = complex(beta)
    beta_plus = beta.conjugate() if beta_plus is None else complex(beta_plus)
    with np.errstate(over="ignore", invalid="ignore"):
        alpha, alpha_plus = _solve(model, np.array([beta]), np.array([beta_plus]), path)
    phase = complex(model.frame_phase(t_index * path.dt))
    return PhasePoint(
        complex(alpha[0, t_index]) * phase,
        complex(alpha_plus[0, t_index]) * phase.conjugate(),
    )


def pathwise_trajectory(
    model: KerrModel,
    initial: PhasePoint,
    path: NoisePath,
    divergence_threshold: float = DEFAULT_THRESHOLD,
) -> Trajectory:
    """Closed-form trajectory of one start point along one noise path.

    Args:
        model: Kerr coefficients and frame
        initial: Start point ``(alpha, alpha_plus)``
        path: Single noise path; every step is recorded
        divergence_threshold: Bound on ``max(|alpha|, |alpha_plus|)``

    Returns:
        The trajectory, NaN from its divergence time on.
    """
    batch = pathwise_batch(
        model,
        np.array([initial.alpha]),
        np.array([initial.alpha_plus]),
        path,
        divergence_threshold,
    )
    return batch.trajectory(0)
