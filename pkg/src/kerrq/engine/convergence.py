"""Strong-convergence measurement of the Heun stepper against the pathwise solution."""

from dataclasses import dataclass

import numpy as np

from kerrq.engine.model import KerrModel
from kerrq.engine.pathwise import pathwise_batch
from kerrq.engine.stepper import integrate_batch
from kerrq.noise import sample_noise_batch
from kerrq.types import NoiseConfig, RealArray


@dataclass(frozen=True, eq=False)
class ConvergenceResult:
    dts: RealArray
    errors: RealArray
    order: float


def strong_error_order(
    model: KerrModel,
    beta: complex,
    t_final: float,
    dts: tuple[float, ...] = (1e-3, 1e-4, 1e-5),
    n_paths: int = 100,
    seed: int = 0,
    refinement: int = 4,
    chunk: int = 20,
) -> ConvergenceResult:
    """Empirical strong order of Heun on common Brownian paths.

    One fine path per trajectory is drawn at ``min(dts) / refinement``; every coarser
    path sums its increments, so all step sizes see the same realization. The reference
    is the pathwise solution on the fine path; the error at each ``dt`` is
    ``E|alpha_heun(T) - alpha_ref(T)|`` and the order is the log-log slope. Paths are
    processed ``chunk`` at a time to bound memory.
    """
    fine_dt = min(dts) / refinement
    n_fine = round(t_final / fine_dt)
    factors = [round(dt / fine_dt) for dt in dts]
    if any(n_fine % f for f in factors):
        raise ValueError("every dt must divide t_final on the fine grid")

    cfg = NoiseConfig(
        mu=model.mu, dt=fine_dt, representation_sign=model.representation_sign, stream_seed=seed
    )
    beta = complex(beta)
    last = np.array([n_fine], dtype=np.int64)
    totals = np.zeros(len(factors))
    for first in range(0, n_paths, chunk):
        count = min(chunk, n_paths - first)
        fine = sample_noise_batch(cfg, first, count, n_fine)
        reference = pathwise_batch(model, beta, beta.conjugate(), fine, np.inf, last).alpha[:, -1]
        for k, factor in enumerate(factors):
            coarse = fine.coarsen(factor)
            end = np.array([coarse.n_steps], dtype=np.int64)
            heun = integrate_batch(model, beta, beta.conjugate(), coarse, np.inf, end).alpha[:, -1]
            totals[k] += np.sum(np.abs(heun - reference))

    dt_arr = np.asarray(dts, dtype=np.float64)
    err_arr = totals / n_paths
    order = float(np.polyfit(np.log(dt_arr), np.log(err_arr), 1)[0])
    return ConvergenceResult(dts=dt_arr, errors=err_arr, order=order)
