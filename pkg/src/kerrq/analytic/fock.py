"""Truncated number-basis states and exact Kerr evolution."""

import math

import numpy as np
from scipy.special import gammaln, xlogy

from kerrq.errors import TruncationError
from kerrq.types import ComplexArray, FockVector

DEFAULT_N_CAP = 4096


def period(mu: float) -> float:
    """Revival period ``2 pi / mu`` of the Kerr oscillator."""
    return 2.0 * math.pi / mu


def reduce_time(mu: float, t: float) -> float:
    """``t`` folded into ``[0, 2 pi / mu)``."""
    return math.fmod(t, period(mu)) % period(mu)


def truncation(alpha0: complex, n_cap: int = DEFAULT_N_CAP) -> int:
    """``N_max = ceil(|a|^2 + 10|a| + 20)``: Poisson tail below 1e-12 for ``|a| <= 6``."""
    r = abs(alpha0)
    n_max = math.ceil(r * r + 10.0 * r + 20.0)
    if n_max > n_cap:
        raise TruncationError(f"|alpha0| = {r:.3g} needs N_max = {n_max} > cap {n_cap}")
    return n_max


def coherent_amplitudes(alpha0: complex, n_max: int) -> ComplexArray:
    """``c_n = exp(-|a|^2/2) a^n / sqrt(n!)`` for ``n = 0..n_max``, computed in log space."""
    n = np.arange(n_max + 1, dtype=np.float64)
    r = abs(alpha0)
    log_mag = -0.5 * r * r + xlogy(n, r) - 0.5 * gammaln(n + 1.0)
    phase = n * np.angle(alpha0) if r > 0 else np.zeros_like(n)
    return np.exp(log_mag + 1j * phase)


def coherent_state(alpha0: complex, n_max: int | None = None) -> FockVector:
    """Coherent state ``|alpha0>`` in a truncated number basis.

    Args:
        alpha0: Coherent amplitude
        n_max: Highest number state kept; ``truncation(alpha0)`` when omitted

    Raises:
        TruncationError: If the default truncation would exceed its cap.
    """
    if n_max is None:
        n_max = truncation(alpha0)
    return FockVector(coherent_amplitudes(complex(alpha0), n_max))


def kerr_phases(n_max: int, mu: float, t: float) -> ComplexArray:
    """``exp(-i n^2 mu t)`` with ``t`` reduced modulo the period."""
    theta = mu * reduce_time(mu, t)
    n = np.arange(n_max + 1, dtype=np.float64)
    return np.exp(-1j * np.fmod(n * n * theta, 2.0 * math.pi))


def fock_evolve(
    alpha0: complex, mu: float, t: float, n_cap: int = DEFAULT_N_CAP
) -> FockVector:
    """Coherent state ``|alpha0>`` evolved for time ``t`` under ``mu (a^dag a)^2``.

    Raises:
        TruncationError: If the required truncation exceeds ``n_cap``.
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    n_max = truncation(alpha0, n_cap)
    return FockVector(coherent_amplitudes(complex(alpha0), n_max) * kerr_phases(n_max, mu, t))


def _padded(a: ComplexArray, b: ComplexArray) -> tuple[ComplexArray, ComplexArray]:
    size = max(a.size, b.size)
    return np.pad(a, (0, size - a.size)), np.pad(b, (0, size - b.size))


def overlap(bra: FockVector, ket: FockVector) -> complex:
    """``<bra|ket>`` with the shorter vector zero-padded."""
    a, b = _padded(bra.amplitudes, ket.amplitudes)
    return complex(np.vdot(a, b))


def fidelity(psi: FockVector, phi: FockVector) -> float:
    """``|<phi|psi>|^2`` for normalized states."""
    return abs(overlap(phi, psi)) ** 2


def cat_state(alpha0: complex, n_max: int | None = None) -> FockVector:
    """Quarter-period superposition ``(1-i)/2 |a> + (1+i)/2 |-a>``."""
    if n_max is None:
        n_max = truncation(alpha0)
    plus = coherent_amplitudes(complex(alpha0), n_max)
    minus = coherent_amplitudes(-complex(alpha0), n_max)
    amps = 0.5 * (1 - 1j) * plus + 0.5 * (1 + 1j) * minus
    return FockVector(amps / np.linalg.norm(amps))


def apply_creation(amplitudes: ComplexArray, times: int = 1) -> ComplexArray:
    """``(a^dag)^times`` on a truncated vector; the result is ``times`` entries longer."""
    out = np.asarray(amplitudes, dtype=np.complex128)
    for _ in range(times):
        n = np.arange(out.size, dtype=np.float64)
        out = np.concatenate([[0j], out * np.sqrt(n + 1.0)])
    return out


def mean_a_fock(psi: FockVector) -> complex:
    """``<a> = sum_n conj(c_n) c_{n+1} sqrt(n+1)`` in the number basis."""
    c = psi.amplitudes
    n = np.arange(c.size - 1, dtype=np.float64)
    return complex(np.sum(np.conj(c[:-1]) * c[1:] * np.sqrt(n + 1.0)))


def antinormal_moment(psi: FockVector, n: int, m: int) -> complex:
    """``<a^n a^dag^m> = <(a^dag)^n psi | (a^dag)^m psi>``, exact for the truncated state."""
    if n < 0 or m < 0:
        raise ValueError("moment orders must be nonnegative")
    left, right = _padded(apply_creation(psi.amplitudes, n), apply_creation(psi.amplitudes, m))
    return complex(np.vdot(left, right))
