"""Start points of trajectories."""

import numpy as np

from kerrq.noise import INITIAL_STREAM, box_muller, stream_generator
from kerrq.types import ComplexArray, InitialMode, PhasePoint


def sample_initial(mode: InitialMode, rng: np.random.Generator) -> PhasePoint:
    """Draw one start point; ``alpha_plus(0) = conj(alpha(0))`` in every mode.

    ``sample_q0`` draws ``beta = alpha0 + g`` with ``g`` complex Gaussian of density
    ``exp(-|g|^2) / pi`` (variance 1/2 per real component), the Q function of the
    coherent state ``|alpha0>``. The other modes return the given point.
    """
    if mode.kind == "sample_q0":
        g_re, g_im = box_muller(rng.random(2))
        beta = mode.point + complex(g_re, g_im) / np.sqrt(2.0)
        return PhasePoint.physical(beta)
    return PhasePoint.physical(mode.point)


def initial_batch(mode: InitialMode, seed: int, first_index: int, count: int) -> ComplexArray:
    """``alpha(0)`` for trajectories ``first_index ..``, each from its own initial stream."""
    if mode.kind != "sample_q0":
        return np.full(count, mode.point, dtype=np.complex128)
    out = np.empty(count, dtype=np.complex128)
    for k in range(count):
        rng = stream_generator(seed, first_index + k, INITIAL_STREAM)
        out[k] = sample_initial(mode, rng).alpha
    return out
