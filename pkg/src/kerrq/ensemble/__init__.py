"""Trajectory ensembles, initial-condition sampling and averaging-order experiments."""

from kerrq.ensemble.experiments import (
    agreement_horizon,
    analytic_series,
    averaging_order_experiment,
)
from kerrq.ensemble.initial import initial_batch, sample_initial
from kerrq.ensemble.runner import (
    Progress,
    divergence_statistics,
    moment_series,
    product_moment_series,
    product_moments,
    run_ensemble,
    simulate,
    validate_config,
)

__all__ = [
    "Progress",
    "agreement_horizon",
    "analytic_series",
    "averaging_order_experiment",
    "divergence_statistics",
    "initial_batch",
    "moment_series",
    "product_moment_series",
    "product_moments",
    "run_ensemble",
    "sample_initial",
    "simulate",
    "validate_config",
]
