"""Exact ground truth for the Kerr oscillator: Fock evolution, closed forms, Q function."""

from kerrq.analytic.fock import (
    antinormal_moment,
    cat_state,
    coherent_state,
    fidelity,
    fock_evolve,
    mean_a_fock,
    period,
    reduce_time,
    truncation,
)
from kerrq.analytic.moments import (
    mean_a_exact,
    ordered_double_average,
    positive_p_stochastic_average,
    q0_quadrature,
    resummed_phase_curve,
    resummed_q0_closed_form,
    resummed_q0_integrability,
    resummed_series_partial_sum,
    stochastic_average_resummed,
)
from kerrq.analytic.qfunction import (
    antinormal_moment_checked,
    antinormal_moment_quadrature,
    q_function,
    q_function_maxima,
    q_value,
)

__all__ = [
    "antinormal_moment",
    "antinormal_moment_checked",
    "antinormal_moment_quadrature",
    "cat_state",
    "coherent_state",
    "fidelity",
    "fock_evolve",
    "mean_a_exact",
    "mean_a_fock",
    "ordered_double_average",
    "period",
    "positive_p_stochastic_average",
    "q0_quadrature",
    "q_function",
    "q_function_maxima",
    "q_value",
    "reduce_time",
    "resummed_phase_curve",
    "resummed_q0_closed_form",
    "resummed_q0_integrability",
    "resummed_series_partial_sum",
    "stochastic_average_resummed",
    "truncation",
]
