"""Langevin to Fokker-Planck coefficient correspondences (Stratonovich convention).

For the pair of Langevin equations

    d alpha      = B_alpha      + C_aa  f_alpha + C_aap f_alpha*
    d alpha_plus = B_alpha_plus + C_apa f_alpha + C_apap f_alpha*

with unit white noises ``f``, the Fokker-Planck equation has

    D_aa   = C_aa^2 + C_aap^2
    D_apap = C_apap^2 + C_apa^2
    D_aap  = C_aa C_apa + C_apap C_aap
    A_i    = B_i + 1/2 sum_{j,l} (d_l C_ij) C_lj
"""

from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np

from kerrq.engine.model import KerrModel
from kerrq.errors import CoefficientError
from kerrq.types import DiffusionPoint, DiffusionReport, PhasePoint

Coefficient = Callable[[complex, complex], complex]
Derivatives = tuple[Coefficient, Coefficient]

NOISE_NAMES = ("c_aa", "c_aap", "c_apa", "c_apap")
_CHECK_POINT = (1.0 + 1.0j, 1.0 - 1.0j)
_FD_STEP = 1e-5


def _zero(alpha: complex, alpha_plus: complex) -> complex:
    return 0j


@dataclass(frozen=True)
class LangevinCoefficients:
    """Drift ``B`` and noise matrix ``C`` of a two-variable Langevin system.

    ``derivatives`` optionally maps a noise coefficient name to its analytic
    ``(d/d alpha, d/d alpha_plus)``; missing entries use central finite differences.
    """

    b_alpha: Coefficient
    b_alpha_plus: Coefficient
    c_aa: Coefficient = _zero
    c_aap: Coefficient = _zero
    c_apa: Coefficient = _zero
    c_apap: Coefficient = _zero
    derivatives: Mapping[str, Derivatives] = field(default_factory=dict)


@dataclass(frozen=True)
class FPCoefficients:
    """Drift vector ``A`` and diffusion matrix ``D`` as functions of a phase point."""

    a_alpha: Coefficient
    a_alpha_plus: Coefficient
    d_aa: Coefficient
    d_apap: Coefficient
    d_aap: Coefficient

    def evaluate(self, alpha: complex, alpha_plus: complex) -> dict[str, complex]:
        return {
            "a_alpha": complex(self.a_alpha(alpha, alpha_plus)),
            "a_alpha_plus": complex(self.a_alpha_plus(alpha, alpha_plus)),
            "d_aa": complex(self.d_aa(alpha, alpha_plus)),
            "d_apap": complex(self.d_apap(alpha, alpha_plus)),
            "d_aap": complex(self.d_aap(alpha, alpha_plus)),
        }


def _checked(name: str, fn: Coefficient) -> Coefficient:
    """Wrap ``fn`` so failures surface as ``CoefficientError`` naming the coefficient."""

    def call(alpha: complex, alpha_plus: complex) -> complex:
        try:
            value = complex(fn(alpha, alpha_plus))
        except Exception as e:
            raise CoefficientError(f"cannot evaluate {name} at ({alpha}, {alpha_plus}): {e}") from e
        if not (np.isfinite(value.real) and np.isfinite(value.imag)):
            raise CoefficientError(f"{name} is not finite at ({alpha}, {alpha_plus})")
        return value

    return call


def finite_difference(fn: Coefficient) -> Derivatives:
    """Central-difference ``(d/d alpha, d/d alpha_plus)`` for a holomorphic coefficient."""

    def d_alpha(alpha: complex, alpha_plus: complex) -> complex:
        h = _FD_STEP * max(1.0, abs(alpha))
        return (fn(alpha + h, alpha_plus) - fn(alpha - h, alpha_plus)) / (2 * h)

    def d_alpha_plus(alpha: complex, alpha_plus: complex) -> complex:
        h = _FD_STEP * max(1.0, abs(alpha_plus))
        return (fn(alpha, alpha_plus + h) - fn(alpha, alpha_plus - h)) / (2 * h)

    return d_alpha, d_alpha_plus


def fp_from_langevin(coeffs: LangevinCoefficients) -> FPCoefficients:
    """Fokker-Planck drift and diffusion implied by a Stratonovich Langevin system.

    Raises:
        CoefficientError: If any coefficient cannot be evaluated at a check point.
    """
    b = _checked("b_alpha", coeffs.b_alpha)
    bp = _checked("b_alpha_plus", coeffs.b_alpha_plus)
    c = {name: _checked(name, getattr(coeffs, name)) for name in NOISE_NAMES}
    dc: dict[str, Derivatives] = {}
    for name in NOISE_NAMES:
        if name in coeffs.derivatives:
            da, dap = coeffs.derivatives[name]
            dc[name] = (_checked(f"d{name}/dalpha", da), _checked(f"d{name}/dalpha_plus", dap))
        else:
            dc[name] = finite_difference(c[name])

    for fn in (b, bp, *c.values(), *(d for pair in dc.values() for d in pair)):
        fn(*_CHECK_POINT)

    def a_alpha(x: complex, y: complex) -> complex:
        c_aa, c_aap, c_apa, c_apap = (c[n](x, y) for n in NOISE_NAMES)
        correction = (
            dc["c_aa"][0](x, y) * c_aa
            + dc["c_aa"][1](x, y) * c_apa
            + dc["c_aap"][0](x, y) * c_aap
            + dc["c_aap"][1](x, y) * c_apap
        )
        return b(x, y) + 0.5 * correction

    def a_alpha_plus(x: complex, y: complex) -> complex:
        c_aa, c_aap, c_apa, c_apap = (c[n](x, y) for n in NOISE_NAMES)
        correction = (
            dc["c_apa"][0](x, y) * c_aa
            + dc["c_apa"][1](x, y) * c_apa
            + dc["c_apap"][0](x, y) * c_aap
            + dc["c_apap"][1](x, y) * c_apap
        )
        return bp(x, y) + 0.5 * correction

    def d_aa(x: complex, y: complex) -> complex:
        return c["c_aa"](x, y) ** 2 + c["c_aap"](x, y) ** 2

    def d_apap(x: complex, y: complex) -> complex:
        return c["c_apap"](x, y) ** 2 + c["c_apa"](x, y) ** 2

    def d_aap(x: complex, y: complex) -> complex:
        return c["c_aa"](x, y) * c["c_apa"](x, y) + c["c_apap"](x, y) * c["c_aap"](x, y)

    return FPCoefficients(a_alpha, a_alpha_plus, d_aa, d_apap, d_aap)


def kerr_langevin(model: KerrModel, analytic_derivatives: bool = True) -> LangevinCoefficients:
    """Physical-variable Langevin coefficients of the Kerr model.

    ``C_aa = sqrt(s 2i mu) alpha``, ``C_apap = sqrt(-s 2i mu) alpha_plus``, no cross terms.
    """
    k, kp = model.noise_scale, model.noise_scale_plus

    def b_alpha(x: complex, y: complex) -> complex:
        return model.physical_drift(x, y)[0]

    def b_alpha_plus(x: complex, y: complex) -> complex:
        return model.physical_drift(x, y)[1]

    derivatives: dict[str, Derivatives] = {}
    if analytic_derivatives:
        derivatives = {
            "c_aa": (lambda x, y: k, _zero),
            "c_apap": (_zero, lambda x, y: kp),
            "c_aap": (_zero, _zero),
            "c_apa": (_zero, _zero),
        }
    return LangevinCoefficients(
        b_alpha=b_alpha,
        b_alpha_plus=b_alpha_plus,
        c_aa=lambda x, y: k * x,
        c_apap=lambda x, y: kp * y,
        derivatives=derivatives,
    )


def kerr_fp_reference(model: KerrModel) -> FPCoefficients:
    """Hand-expanded Kerr Fokker-Planck coefficients.

    Q function: ``A_alpha = -i mu (2 alpha_plus alpha - 3) alpha``, ``D_aa = 2i mu alpha^2``,
    ``D_aap = 0``. The positive-P equation has ``(2 alpha_plus alpha + 1)`` and the opposite
    diffusion sign.
    """
    mu, s = model.mu, model.representation_sign
    shift = 2.0 * model.number_offset + s

    return FPCoefficients(
        a_alpha=lambda x, y: -1j * mu * (2.0 * y * x - shift) * x,
        a_alpha_plus=lambda x, y: 1j * mu * (2.0 * y * x - shift) * y,
        d_aa=lambda x, y: s * 2j * mu * x**2,
        d_apap=lambda x, y: -s * 2j * mu * y**2,
        d_aap=lambda x, y: 0j,
    )


def fp_round_trip_residuals(
    model: KerrModel,
    n_points: int = 100,
    seed: int = 0,
    radius: float = 3.0,
    analytic_derivatives: bool = True,
) -> dict[str, float]:
    """Largest relative residual of ``fp_from_langevin`` against ``kerr_fp_reference``.

    Points are drawn uniformly from a disc in each of ``alpha`` and ``alpha_plus``
    independently. Where the reference vanishes the residual is absolute.
    """
    rng = np.random.default_rng(seed)
    derived = fp_from_langevin(kerr_langevin(model, analytic_derivatives))
    reference = kerr_fp_reference(model)

    def disc(n: int) -> np.ndarray:
        r = radius * np.sqrt(rng.random(n))
        return r * np.exp(2j * np.pi * rng.random(n))

    residuals = dict.fromkeys(("a_alpha", "a_alpha_plus", "d_aa", "d_apap", "d_aap"), 0.0)
    for x, y in zip(disc(n_points), disc(n_points)):
        got = derived.evaluate(complex(x), complex(y))
        want = reference.evaluate(complex(x), complex(y))
        for name in residuals:
            scale = abs(want[name]) or 1.0
            residuals[name] = max(residuals[name], abs(got[name] - want[name]) / scale)
    return residuals


def negative_diffusion_check(
    fp: FPCoefficients, sample_points: Iterable[complex | PhasePoint]
) -> DiffusionReport:
    """Test ``D_aap < |D_aa|`` at each point.

    Bare complex points are placed on the physical manifold ``alpha_plus = conj(alpha)``.
    The cross coefficient is compared through its real part. A point where both sides
    vanish is reported as a boundary point and fails the strict inequality.
    """
    points = []
    for sample in sample_points:
        p = sample if isinstance(sample, PhasePoint) else PhasePoint.physical(sample)
        values = fp.evaluate(p.alpha, p.alpha_plus)
        points.append(
            DiffusionPoint(
                alpha=p.alpha,
                alpha_plus=p.alpha_plus,
                d_cross=values["d_aap"],
                d_abs_self=abs(values["d_aa"]),
            )
        )
    return DiffusionReport(points=tuple(points))
