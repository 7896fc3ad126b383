"""Husimi Q function of pure number-basis states on phase-space grids."""

import math

import numpy as np
from scipy.ndimage import maximum_filter
from scipy.optimize import minimize
from scipy.special import gammaln, xlogy

from kerrq.analytic.fock import antinormal_moment
from kerrq.errors import QuadratureExtentError
from kerrq.types import ComplexArray, FockVector, QGrid

# Q on the grid edge above this fraction of its peak means the grid cuts off mass
EDGE_FRACTION = 1e-10


def _coherent_overlap(psi: FockVector, alpha: ComplexArray) -> ComplexArray:
    """``<alpha|psi> = exp(-|alpha|^2/2) sum_n c_n conj(alpha)^n / sqrt(n!)``."""
    alpha = np.asarray(alpha, dtype=np.complex128)
    c = psi.amplitudes
    r = np.abs(alpha)[..., np.newaxis]
    theta = np.angle(alpha)[..., np.newaxis]
    n = np.arange(c.size, dtype=np.float64)
    log_mag = -0.5 * r**2 + xlogy(n, r) - 0.5 * gammaln(n + 1.0)
    basis = np.exp(log_mag - 1j * n * theta)
    return np.sum(basis * c, axis=-1)


def q_value(psi: FockVector, alpha: ComplexArray | complex) -> np.ndarray:
    """``Q(alpha) = |<alpha|psi>|^2 / pi``."""
    return np.abs(_coherent_overlap(psi, np.asarray(alpha))) ** 2 / math.pi


def q_function(
    psi: FockVector,
    extent: float | tuple[float, float, float, float],
    resolution: int | tuple[int, int] = 256,
) -> QGrid:
    """Sample Q on a rectangle.

    Args:
        psi: Normalized pure state
        extent: Half-width of a square centred at the origin, or ``(x0, x1, y0, y1)``
        resolution: Points per axis, or ``(n_x, n_y)``
    """
    if isinstance(extent, (int, float)):
        x0, x1, y0, y1 = -extent, extent, -extent, extent
    else:
        x0, x1, y0, y1 = extent
    n_x, n_y = (resolution, resolution) if isinstance(resolution, int) else resolution
    if n_x < 2 or n_y < 2:
        raise ValueError("q_function needs at least 2 points per axis")
    x = np.linspace(x0, x1, n_x)
    y = np.linspace(y0, y1, n_y)
    values = np.empty((n_y, n_x))
    for j, yj in enumerate(y):
        values[j] = q_value(psi, x + 1j * yj)
    return QGrid(x=x, y=y, values=values)


def q_function_maxima(
    psi: FockVector, grid: QGrid, n_peaks: int = 2, window: int = 5
) -> list[complex]:
    """Locations of the ``n_peaks`` highest local maxima of Q, refined off-grid.

    Grid maxima seed a Nelder-Mead search on the exact Q of ``psi``, so the result is
    not limited by the grid spacing. Peaks are returned highest first.
    """
    local = grid.values == maximum_filter(grid.values, size=window, mode="nearest")
    js, iis = np.nonzero(local)
    order = np.argsort(grid.values[js, iis])[::-1][:n_peaks]

    peaks = []
    for k in order:
        start = np.array([grid.x[iis[k]], grid.y[js[k]]])
        result = minimize(
            lambda p: -float(q_value(psi, complex(p[0], p[1]))),
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": 1e-14},
        )
        peaks.append(complex(result.x[0], result.x[1]))
    return peaks


def antinormal_moment_quadrature(grid: QGrid, n: int, m: int) -> complex:
    """``<a^n a^dag^m> = int Q alpha^n conj(alpha)^m d^2 alpha`` by trapezoid quadrature.

    Raises:
        QuadratureExtentError: If Q has not decayed on the grid edge.
    """
    values = grid.values
    edge = max(values[0].max(), values[-1].max(), values[:, 0].max(), values[:, -1].max())
    if edge > EDGE_FRACTION * values.max():
        half_width = max(abs(grid.x[0]), abs(grid.x[-1]), abs(grid.y[0]), abs(grid.y[-1]))
        raise QuadratureExtentError(
            f"Q is {edge:.3g} on the grid edge", suggested_extent=half_width + 4.0
        )
    alpha = grid.mesh
    return grid.integrate(alpha**n * np.conj(alpha) ** m)


def antinormal_moment_checked(
    psi: FockVector, grid: QGrid, n: int, m: int
) -> tuple[complex, complex]:
    """Fock-basis value and quadrature value of the same antinormal moment."""
    return antinormal_moment(psi, n, m), antinormal_moment_quadrature(grid, n, m)
