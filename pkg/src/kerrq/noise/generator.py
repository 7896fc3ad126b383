"""Discrete complex noise increments for the doubled phase-space SDEs.

Each trajectory owns a Philox counter-based stream keyed by ``(seed, trajectory_index)``
so paths can be generated in any order, or concurrently, and still be reproducible.
Gaussian variates come from the Box-Muller transform applied to consecutive uniform
pairs, so each step consumes exactly two doubles of its stream.
"""

import logging

import numpy as np

from kerrq.types import ComplexArray, NoiseConfig, NoisePath, RealArray

logger = logging.getLogger(__name__)

# spawn-key tags of the two streams owned by a trajectory
NOISE_STREAM = 0
INITIAL_STREAM = 1


def stream_generator(
    seed: int, trajectory_index: int, stream: int = NOISE_STREAM
) -> np.random.Generator:
    """Counter-based generator for one trajectory.

    Equivalent to ``SeedSequence(seed).spawn(...)[trajectory_index]`` with an extra
    stream tag, without materialising the earlier children.
    """
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(trajectory_index, stream))
    return np.random.Generator(np.random.Philox(seq))


def box_muller(uniforms: RealArray) -> tuple[RealArray, RealArray]:
    """Two independent standard normal arrays from ``(..., 2)`` uniforms on [0, 1)."""
    u1 = 1.0 - uniforms[..., 0]  # (0, 1], keeps log finite
    u2 = uniforms[..., 1]
    radius = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    return radius * np.cos(theta), radius * np.sin(theta)


def increment_scales(cfg: NoiseConfig) -> tuple[complex, complex]:
    """Principal square roots ``sqrt(s 2i mu dt)`` and ``sqrt(-s 2i mu dt)``."""
    return complex(np.sqrt(cfg.variance_alpha)), complex(np.sqrt(cfg.variance_alpha_plus))


def _standard_pairs(cfg: NoiseConfig, n_steps: int) -> tuple[RealArray, RealArray]:
    rng = stream_generator(cfg.stream_seed, cfg.trajectory_index)
    return box_muller(rng.random((n_steps, 2)))


def _scale(
    cfg: NoiseConfig, g: RealArray, g_plus: RealArray
) -> tuple[ComplexArray, ComplexArray]:
    scale, scale_plus = increment_scales(cfg)
    return scale * g, scale_plus * g_plus


def sample_noise_path(cfg: NoiseConfig, n_steps: int) -> NoisePath:
    """Generate ``n_steps`` increments ``(eta_l, eta_plus_l)`` for one trajectory.

    ``eta_l = sqrt(s 2i mu dt) g_l`` and ``eta_plus_l = sqrt(-s 2i mu dt) g_plus_l`` with
    independent standard normals, ``s`` the representation sign.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    g, g_plus = _standard_pairs(cfg, n_steps)
    eta, eta_plus = _scale(cfg, g, g_plus)
    return NoisePath.from_increments(cfg, eta, eta_plus)


def sample_noise_batch(
    cfg: NoiseConfig, first_index: int, count: int, n_steps: int
) -> NoisePath:
    """Stack the paths of trajectories ``first_index .. first_index + count - 1``.

    Row ``k`` is bit-identical to ``sample_noise_path`` for trajectory ``first_index + k``.
    ``cfg.trajectory_index`` is ignored.
    """
    if count < 1 or n_steps < 1:
        raise ValueError(f"need count >= 1 and n_steps >= 1, got {count} and {n_steps}")
    uniforms = np.empty((count, n_steps, 2))
    for k in range(count):
        uniforms[k] = stream_generator(cfg.stream_seed, first_index + k).random((n_steps, 2))
    g, g_plus = box_muller(uniforms)
    eta, eta_plus = _scale(cfg, g, g_plus)
    logger.debug("sampled noise for trajectories %d..%d", first_index, first_index + count - 1)
    return NoisePath.from_increments(cfg, eta, eta_plus)


def noise_free_path(cfg: NoiseConfig, n_steps: int, count: int | None = None) -> NoisePath:
    """All-zero increments: the drift-only limit of the dynamics."""
    shape = (n_steps,) if count is None else (count, n_steps)
    zeros = np.zeros(shape, dtype=np.complex128)
    return NoisePath.from_increments(cfg, zeros, zeros.copy())
