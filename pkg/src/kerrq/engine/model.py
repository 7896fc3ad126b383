"""Coefficient model of the Kerr oscillator SDEs."""

import cmath
from dataclasses import dataclass

import numpy as np

from kerrq.types import POSITIVE_P_SIGN, Q_SIGN, ComplexArray, Representation


@dataclass(frozen=True)
class KerrModel:
    """Drift and noise coefficients of the Kerr oscillator in doubled phase space.

    Both representations are simulated with the Q-form drift
    ``B_alpha = -2i mu (alpha_plus alpha - 1) alpha``. In the positive-P representation
    the simulated pair are rotating variables: the physical amplitudes are recovered by
    ``frame_phase``, which removes the ``-1`` term of the drift. The noise law carries
    the sign of the representation (see ``NoiseConfig``).
    """

    mu: float
    representation_sign: int = Q_SIGN

    def __post_init__(self) -> None:
        if not (np.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.representation_sign not in (Q_SIGN, POSITIVE_P_SIGN):
            raise ValueError(
                f"representation_sign must be +1 or -1, got {self.representation_sign}"
            )

    @classmethod
    def q(cls, mu: float) -> "KerrModel":
        """Q-function SDEs: ``<eta^2> = 2i mu dt``, no rotating frame."""
        return cls(mu, Q_SIGN)

    @classmethod
    def positive_p(cls, mu: float) -> "KerrModel":
        """Positive-P SDEs: noise sign flipped, simulated in a frame rotating at ``2 mu``."""
        return cls(mu, POSITIVE_P_SIGN)

    @classmethod
    def for_representation(cls, mu: float, representation: Representation) -> "KerrModel":
        return cls.q(mu) if representation == "q" else cls.positive_p(mu)

    @property
    def is_q(self) -> bool:
        return self.representation_sign == Q_SIGN

    @property
    def number_offset(self) -> float:
        """The constant subtracted from ``alpha_plus alpha`` in the physical drift."""
        return 1.0 if self.is_q else 0.0

    @property
    def frame_rate(self) -> float:
        """Angular rate of the rotating frame the simulated variables live in."""
        return 2.0 * self.mu * (1.0 - self.number_offset)

    @property
    def noise_scale(self) -> complex:
        """``sqrt(s 2i mu)``, the factor between ``C_alpha_alpha`` and ``alpha``."""
        return cmath.sqrt(complex(0.0, 2.0 * self.representation_sign * self.mu))

    @property
    def noise_scale_plus(self) -> complex:
        return cmath.sqrt(complex(0.0, -2.0 * self.representation_sign * self.mu))

    def drift(
        self, alpha: ComplexArray | complex, alpha_plus: ComplexArray | complex
    ) -> tuple[ComplexArray, ComplexArray]:
        """Simulated-frame drift ``(B_alpha, B_alpha_plus)``."""
        excess = alpha_plus * alpha - 1.0
        factor = 2j * self.mu * excess
        return -factor * alpha, factor * alpha_plus

    def noise_gain(
        self, alpha: ComplexArray | complex, alpha_plus: ComplexArray | complex
    ) -> tuple[ComplexArray | complex, ComplexArray | complex]:
        """Multipliers of the increments ``(eta, eta_plus)``; these carry ``sqrt(s 2i mu)``."""
        return alpha, alpha_plus

    def frame_phase(self, t: np.ndarray | float) -> ComplexArray | complex:
        """Factor turning a simulated ``alpha`` into the physical one at time ``t``."""
        return np.exp(-1j * self.frame_rate * np.asarray(t))

    def physical_drift(self, alpha: complex, alpha_plus: complex) -> tuple[complex, complex]:
        """Drift of the physical (un-rotated) variables."""
        excess = alpha_plus * alpha - self.number_offset
        factor = 2j * self.mu * excess
        return -factor * alpha, factor * alpha_plus
