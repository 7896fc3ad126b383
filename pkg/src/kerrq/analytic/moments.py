"""Closed-form and series expectation values of the Kerr oscillator.

All times are in the rotating frame and are folded modulo the period ``2 pi / mu``
before any series is summed.
"""

import cmath
import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from kerrq.analytic.fock import reduce_time
from kerrq.types import ComplexArray, IntegrabilityDiagnosis, MomentFormulaResult

MAX_SERIES_TERMS = 500
DEFAULT_TOLERANCE = 1e-12
# cos(2 mu t) at or below this counts as non-positive
COS_TOLERANCE = 1e-12


def _check_mu(mu: float) -> None:
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")


def mean_a_exact(alpha0: complex, mu: float, t: float) -> complex:
    """``<a(t)> = e^{-i mu t} a0 exp(|a0|^2 (e^{-2i mu t} - 1))`` for a coherent start."""
    _check_mu(mu)
    t = reduce_time(mu, t)
    r2 = abs(alpha0) ** 2
    return cmath.exp(-1j * mu * t) * alpha0 * cmath.exp(r2 * (cmath.exp(-2j * mu * t) - 1.0))


def stochastic_average_resummed(beta: complex, mu: float, t: float) -> complex:
    """Fixed-start stochastic mean after re-summing the ``|beta|^2`` series.

    ``<alpha(t)>_S = beta e^{3i mu t} exp(|beta|^2 (1 - e^{2i mu t}))``.
    """
    _check_mu(mu)
    t = reduce_time(mu, t)
    r2 = abs(beta) ** 2
    return beta * cmath.exp(3j * mu * t) * cmath.exp(r2 * (1.0 - cmath.exp(2j * mu * t)))


def resummed_series_partial_sum(beta: complex, mu: float, t: float, n_terms: int) -> complex:
    """First ``n_terms`` orders of the stochastic mean before re-summation.

    The order ``|beta|^{2n}`` term is ``(-1)^n |beta|^{2n} e^{i mu t} (e^{2i mu t} - 1)^n / n!``,
    all multiplied by ``beta e^{2i mu t}``.
    """
    _check_mu(mu)
    t = reduce_time(mu, t)
    r2 = abs(beta) ** 2
    ratio = -r2 * (cmath.exp(2j * mu * t) - 1.0)
    term = cmath.exp(1j * mu * t)
    total = 0j
    for n in range(n_terms):
        total += term
        term *= ratio / (n + 1)
    return beta * cmath.exp(2j * mu * t) * total


def positive_p_stochastic_average(beta: complex, mu: float, t: float) -> complex:
    """Positive-P stochastic mean ``beta e^{-i mu t} exp(|beta|^2 (e^{-2i mu t} - 1))``."""
    _check_mu(mu)
    t = reduce_time(mu, t)
    r2 = abs(beta) ** 2
    return beta * cmath.exp(-1j * mu * t) * cmath.exp(r2 * (cmath.exp(-2j * mu * t) - 1.0))


def ordered_double_average(
    alpha0: complex,
    mu: float,
    t: float,
    tolerance: float = DEFAULT_TOLERANCE,
    max_terms: int = MAX_SERIES_TERMS,
) -> MomentFormulaResult:
    """``<<alpha(t)>_{Q0}>_S``: average over the initial Q function before the noise.

    Sums ``e^{3i mu t} sum_l |a0|^{2l} a0 / (l+1)! * S_l`` where the inner series over
    ``n >= l`` of ``z^n (n+1)! / ((n-l)! l!)``, ``z = 1 - e^{2i mu t}``, is re-summed to
    ``S_l = (l+1) z^l (1-z)^{-(l+2)}``. Stops once a term past the peak of the series is
    below ``tolerance`` relative to the running sum.
    """
    _check_mu(mu)
    if tolerance <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    alpha0 = complex(alpha0)
    if alpha0 == 0:
        return MomentFormulaResult(0j, 1, True)

    t = reduce_time(mu, t)
    z = 1.0 - cmath.exp(2j * mu * t)
    one_minus_z = 1.0 - z
    r2 = abs(alpha0) ** 2
    ratio = r2 * z / one_minus_z
    peak = abs(ratio)

    # l = 0: |a0|^0 / 1! * (0 + 1) z^0 (1 - z)^-2
    term = alpha0 / one_minus_z**2
    total = term
    for l in range(1, max_terms):
        # |a0|^{2l}/(l+1)! * (l+1) z^l / (1-z)^{l+2}, from the previous term
        term = term * ratio / l
        total += term
        if l > peak and abs(term) <= tolerance * abs(total):
            value = cmath.exp(3j * mu * t) * total
            return MomentFormulaResult(value, l + 1, True)
    return MomentFormulaResult(
        cmath.exp(3j * mu * t) * total,
        max_terms,
        False,
        divergent_reason=f"last term {abs(term):.3g} above tolerance after {max_terms} terms",
    )


def _resummed_integrand(beta: ComplexArray, alpha0: complex, mu: float, t: float) -> ComplexArray:
    q0 = np.exp(-np.abs(beta - alpha0) ** 2) / math.pi
    growth = np.exp(np.abs(beta) ** 2 * (1.0 - np.exp(2j * mu * t)))
    return q0 * beta * np.exp(3j * mu * t) * growth


def q0_quadrature(
    alpha0: complex,
    mu: float,
    t: float,
    radius: float = 8.0,
    n_radial: int = 160,
    n_angular: int = 160,
) -> complex:
    """Q0 average of the re-summed mean over the disc ``|beta - a0| <= radius``.

    Gauss-Legendre in the radius, trapezoid (spectral for periodic integrands) in angle,
    centred on ``alpha0`` where the Q0 Gaussian peaks.
    """
    t = reduce_time(mu, t)
    nodes, weights = leggauss(n_radial)
    r = 0.5 * radius * (nodes + 1.0)
    w_r = 0.5 * radius * weights * r
    theta = 2.0 * math.pi * np.arange(n_angular) / n_angular
    beta = complex(alpha0) + r[:, np.newaxis] * np.exp(1j * theta)[np.newaxis, :]
    with np.errstate(over="ignore", invalid="ignore"):
        values = _resummed_integrand(beta, complex(alpha0), mu, t)
    return complex(np.sum(w_r[:, np.newaxis] * values) * (2.0 * math.pi / n_angular))


def resummed_q0_closed_form(alpha0: complex, mu: float, t: float) -> complex:
    """Gaussian integral of the re-summed mean against Q0, valid where ``cos(2 mu t) > 0``.

    With ``w = e^{2i mu t}``: ``a0 e^{3i mu t} w^{-2} exp(|a0|^2 (1/w - 1))``.
    """
    t = reduce_time(mu, t)
    w = cmath.exp(2j * mu * t)
    r2 = abs(alpha0) ** 2
    return alpha0 * cmath.exp(3j * mu * t) / w**2 * cmath.exp(r2 * (1.0 / w - 1.0))


def resummed_q0_integrability(
    alpha0: complex, mu: float, t: float, radius: float = 8.0
) -> IntegrabilityDiagnosis:
    """Diagnose the Q0 average of the re-summed stochastic mean at time ``t``.

    The integrand grows like ``exp(-|beta|^2 cos(2 mu t))``, so it is unbounded exactly
    when ``cos(2 mu t) <= 0``. Where it is integrable the quadrature value, the Gaussian
    closed form and ``mean_a_exact`` are all reported; they are not asserted equal.
    """
    _check_mu(mu)
    c = math.cos(2.0 * mu * reduce_time(mu, t))
    if c <= COS_TOLERANCE:
        return IntegrabilityDiagnosis(status="unbounded", t=t, cos_2mut=c)
    return IntegrabilityDiagnosis(
        status="integrable",
        t=t,
        cos_2mut=c,
        quadrature_value=q0_quadrature(alpha0, mu, t, radius),
        closed_form_value=resummed_q0_closed_form(alpha0, mu, t),
        exact_value=mean_a_exact(alpha0, mu, t),
    )


def resummed_phase_curve(beta: complex, mu: float, n_points: int = 256) -> ComplexArray:
    """Re-summed stochastic mean over one period (the small closed curve in the plane)."""
    ts = np.linspace(0.0, 2.0 * math.pi / mu, n_points)
    return np.array([stochastic_average_resummed(beta, mu, t) for t in ts])
