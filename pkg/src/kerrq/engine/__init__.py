"""Doubled phase-space SDE engine: coefficients, integrators, Fokker-Planck mapping."""

from kerrq.engine.convergence import ConvergenceResult, strong_error_order
from kerrq.engine.fokker_planck import (
    FPCoefficients,
    LangevinCoefficients,
    finite_difference,
    fp_from_langevin,
    fp_round_trip_residuals,
    kerr_fp_reference,
    kerr_langevin,
    negative_diffusion_check,
)
from kerrq.engine.model import KerrModel
from kerrq.engine.pathwise import pathwise_batch, pathwise_exact_solution, pathwise_trajectory
from kerrq.engine.stepper import DEFAULT_THRESHOLD, heun_step, integrate_batch, integrate_trajectory

__all__ = [
    "DEFAULT_THRESHOLD",
    "ConvergenceResult",
    "FPCoefficients",
    "KerrModel",
    "LangevinCoefficients",
    "finite_difference",
    "fp_from_langevin",
    "fp_round_trip_residuals",
    "heun_step",
    "integrate_batch",
    "integrate_trajectory",
    "kerr_fp_reference",
    "kerr_langevin",
    "negative_diffusion_check",
    "pathwise_batch",
    "pathwise_exact_solution",
    "pathwise_trajectory",
    "strong_error_order",
]
