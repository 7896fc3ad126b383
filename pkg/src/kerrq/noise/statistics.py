"""Empirical moment checks for generated noise."""

from collections.abc import Iterable

import numpy as np

from kerrq.errors import InsufficientSamplesError, NoiseConfigError
from kerrq.types import ComplexArray, MomentCheck, NoiseConfig, NoisePath, NoiseReport

MIN_INCREMENTS = 1000


def _check(name: str, samples: ComplexArray, target: complex) -> MomentCheck:
    n = samples.size
    mean = complex(samples.mean())
    se_re = float(samples.real.std(ddof=1) / np.sqrt(n))
    se_im = float(samples.imag.std(ddof=1) / np.sqrt(n))
    z = 0.0
    for delta, se in ((mean.real - target.real, se_re), (mean.imag - target.imag, se_im)):
        if delta != 0.0:
            z = max(z, abs(delta) / se if se > 0 else float("inf"))
    return MomentCheck(name, mean, complex(target), float(np.hypot(se_re, se_im)), z)


def _common_law(paths: list[NoisePath]) -> NoiseConfig:
    first = paths[0].config
    for path in paths[1:]:
        cfg = path.config
        if (cfg.mu, cfg.dt, cfg.representation_sign) != (
            first.mu,
            first.dt,
            first.representation_sign,
        ):
            raise NoiseConfigError("noise paths in one collection must share mu, dt and sign")
    return first


def noise_statistics(paths: NoisePath | Iterable[NoisePath]) -> NoiseReport:
    """Compare pooled increment moments with the law they were drawn from.

    Checks ``<eta>``, ``<eta^2>``, ``<eta_plus^2>``, ``<eta eta_plus>``, ``<|eta|^2>`` and
    ``<eta conj(eta_plus)>``; the last one separates independent noises from conjugate ones.

    Raises:
        InsufficientSamplesError: If fewer than 1000 increments are pooled.
    """
    collection = [paths] if isinstance(paths, NoisePath) else list(paths)
    if not collection:
        raise InsufficientSamplesError("empty noise path collection")
    cfg = _common_law(collection)

    eta = np.concatenate([p.eta.ravel() for p in collection])
    eta_plus = np.concatenate([p.eta_plus.ravel() for p in collection])
    if eta.size < MIN_INCREMENTS:
        raise InsufficientSamplesError(
            f"need at least {MIN_INCREMENTS} increments, got {eta.size}"
        )

    checks = (
        _check("eta", eta, 0j),
        _check("eta^2", eta**2, cfg.variance_alpha),
        _check("eta_plus^2", eta_plus**2, cfg.variance_alpha_plus),
        _check("eta*eta_plus", eta * eta_plus, 0j),
        _check("|eta|^2", np.abs(eta) ** 2 + 0j, complex(2.0 * cfg.mu * cfg.dt)),
        _check("eta*conj(eta_plus)", eta * np.conj(eta_plus), 0j),
    )
    return NoiseReport(n_increments=int(eta.size), checks=checks)
