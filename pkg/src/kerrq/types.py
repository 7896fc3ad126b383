"""Type definitions for kerrq.

Central location for all dataclasses and type definitions used throughout the app.
"""

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray

from kerrq.errors import NoiseConfigError

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]

Representation = Literal["q", "positive_p"]
InitialKind = Literal["fixed_beta", "sample_q0", "delta_positive_p"]
Method = Literal["exact", "heun"]
Command = Literal["simulate", "analytic", "compare", "fpcheck", "qgrid", "diverge"]
OutputFormat = Literal["csv", "jsonl"]

Q_SIGN = 1
POSITIVE_P_SIGN = -1
# floor of standard errors, in ulps of the compared means
ROUNDING_ULPS = 16


def representation_sign(representation: Representation) -> int:
    """Map a representation name onto the sign of its diffusion."""
    return Q_SIGN if representation == "q" else POSITIVE_P_SIGN


@dataclass(frozen=True)
class NoiseConfig:
    """Law and stream identity of one trajectory's noise."""

    mu: float
    dt: float
    representation_sign: int = Q_SIGN
    stream_seed: int = 0
    trajectory_index: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise NoiseConfigError(f"mu must be positive, got {self.mu}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise NoiseConfigError(f"dt must be positive, got {self.dt}")
        if self.representation_sign not in (Q_SIGN, POSITIVE_P_SIGN):
            raise NoiseConfigError(
                f"representation_sign must be +1 or -1, got {self.representation_sign}"
            )
        if self.trajectory_index < 0:
            raise NoiseConfigError(
                f"trajectory_index must be nonnegative, got {self.trajectory_index}"
            )
        if not 0 <= self.stream_seed < 2**64:
            raise NoiseConfigError(f"stream_seed must fit in 64 bits, got {self.stream_seed}")

    @property
    def variance_alpha(self) -> complex:
        """Target second moment of one eta increment (``s * 2i mu dt``)."""
        return complex(0.0, 2.0 * self.representation_sign * self.mu * self.dt)

    @property
    def variance_alpha_plus(self) -> complex:
        """Target second moment of one eta-plus increment."""
        return -self.variance_alpha


@dataclass(frozen=True, eq=False)
class NoisePath:
    """Discrete noise increments of one trajectory (or a stacked batch of them).

    Arrays have shape ``(n_steps,)`` for a single path or ``(n_paths, n_steps)`` for a
    batch; the last axis is always time. ``cum_*`` are running sums in generation order.
    """

    config: NoiseConfig
    eta: ComplexArray
    eta_plus: ComplexArray
    cum_xi: ComplexArray
    cum_xi_plus: ComplexArray
    cum_sum_both: ComplexArray

    @classmethod
    def from_increments(
        cls, config: NoiseConfig, eta: ComplexArray, eta_plus: ComplexArray
    ) -> "NoisePath":
        eta = np.asarray(eta, dtype=np.complex128)
        eta_plus = np.asarray(eta_plus, dtype=np.complex128)
        return cls(
            config=config,
            eta=eta,
            eta_plus=eta_plus,
            cum_xi=np.cumsum(eta, axis=-1),
            cum_xi_plus=np.cumsum(eta_plus, axis=-1),
            cum_sum_both=np.cumsum(eta + eta_plus, axis=-1),
        )

    @property
    def n_steps(self) -> int:
        return int(self.eta.shape[-1])

    @property
    def dt(self) -> float:
        return self.config.dt

    @property
    def is_batch(self) -> bool:
        return self.eta.ndim == 2

    def coarsen(self, factor: int) -> "NoisePath":
        """Sum consecutive groups of ``factor`` increments (same Brownian path, larger dt)."""
        if factor < 1 or self.n_steps % factor:
            raise NoiseConfigError(
                f"cannot coarsen {self.n_steps} steps by a factor of {factor}"
            )
        shape = (*self.eta.shape[:-1], self.n_steps // factor, factor)
        cfg = NoiseConfig(
            mu=self.config.mu,
            dt=self.config.dt * factor,
            representation_sign=self.config.representation_sign,
            stream_seed=self.config.stream_seed,
            trajectory_index=self.config.trajectory_index,
        )
        return NoisePath.from_increments(
            cfg, self.eta.reshape(shape).sum(axis=-1), self.eta_plus.reshape(shape).sum(axis=-1)
        )


@dataclass(frozen=True)
class MomentCheck:
    """Empirical noise moment against its target value."""

    name: str
    empirical: complex
    target: complex
    stderr: float
    z_score: float

    @property
    def passed(self) -> bool:
        return self.z_score < 4.0


@dataclass(frozen=True)
class NoiseReport:
    """Empirical first and second moments of a collection of noise paths."""

    n_increments: int
    checks: tuple[MomentCheck, ...]

    def __getitem__(self, name: str) -> MomentCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    @property
    def all_passed(self) -> bool:
        return all(check.passed for check in self.checks)


@dataclass(frozen=True)
class PhasePoint:
    """A point of the doubled phase space. ``alpha_plus`` is not tied to ``conj(alpha)``."""

    alpha: complex
    alpha_plus: complex

    @classmethod
    def physical(cls, beta: complex) -> "PhasePoint":
        """Start point of a physical state: ``alpha_plus = conj(alpha)``."""
        beta = complex(beta)
        return cls(beta, beta.conjugate())

    @property
    def is_finite(self) -> bool:
        return all(
            math.isfinite(v.real) and math.isfinite(v.imag)
            for v in (complex(self.alpha), complex(self.alpha_plus))
        )

    @property
    def product(self) -> complex:
        """The combination ``alpha_plus * alpha``."""
        return complex(self.alpha_plus) * complex(self.alpha)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One integrated trajectory sampled on ``times``.

    Points at or after ``divergence_time`` are NaN.
    """

    times: RealArray
    alpha: ComplexArray
    alpha_plus: ComplexArray
    divergence_time: float | None = None

    @property
    def divergence_flag(self) -> bool:
        return self.divergence_time is not None

    @property
    def points(self) -> list[PhasePoint]:
        return [PhasePoint(complex(a), complex(b)) for a, b in zip(self.alpha, self.alpha_plus)]

    @property
    def valid(self) -> NDArray[np.bool_]:
        return np.isfinite(self.alpha) & np.isfinite(self.alpha_plus)

    @property
    def diverged_mask(self) -> NDArray[np.bool_]:
        """Per-sample flag, set from ``divergence_time`` onward."""
        if self.divergence_time is None:
            return ~self.valid
        return (self.times >= self.divergence_time) | ~self.valid


@dataclass(frozen=True, eq=False)
class TrajectoryBatch:
    """Many trajectories on a common record grid.

    ``divergence_step`` holds the integration step at which each trajectory diverged, or
    ``-1``. Recorded values at or after that step are NaN.
    """

    times: RealArray
    record_steps: NDArray[np.int64]
    alpha: ComplexArray
    alpha_plus: ComplexArray
    divergence_step: NDArray[np.int64]
    dt: float

    @property
    def n_trajectories(self) -> int:
        return int(self.alpha.shape[0])

    @property
    def diverged(self) -> NDArray[np.bool_]:
        return self.divergence_step >= 0

    @property
    def alive(self) -> NDArray[np.bool_]:
        """``(n_trajectories, n_records)`` mask of samples taken before divergence."""
        steps = np.where(self.diverged, self.divergence_step, np.iinfo(np.int64).max)
        return self.record_steps[np.newaxis, :] < steps[:, np.newaxis]

    @property
    def divergence_times(self) -> RealArray:
        return self.divergence_step[self.diverged].astype(np.float64) * self.dt

    def trajectory(self, index: int) -> Trajectory:
        step = int(self.divergence_step[index])
        return Trajectory(
            times=self.times,
            alpha=self.alpha[index],
            alpha_plus=self.alpha_plus[index],
            divergence_time=None if step < 0 else step * self.dt,
        )


@dataclass(frozen=True, eq=False)
class FockVector:
    """Truncated number-basis amplitudes ``c_n``, ``n = 0..n_max``."""

    amplitudes: ComplexArray

    @property
    def n_max(self) -> int:
        return int(self.amplitudes.shape[0]) - 1

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


@dataclass(frozen=True, eq=False)
class QGrid:
    """Q function sampled on a rectangle of the complex plane.

    ``values[j, i]`` is ``Q(x[i] + 1j * y[j])``.
    """

    x: RealArray
    y: RealArray
    values: RealArray

    @property
    def corners(self) -> tuple[complex, complex]:
        return complex(self.x[0], self.y[0]), complex(self.x[-1], self.y[-1])

    @property
    def resolution(self) -> tuple[int, int]:
        return int(self.x.shape[0]), int(self.y.shape[0])

    @property
    def mesh(self) -> ComplexArray:
        xx, yy = np.meshgrid(self.x, self.y)
        return xx + 1j * yy

    def integrate(self, weight: ComplexArray | None = None) -> complex:
        """Trapezoid quadrature of ``Q * weight`` over the grid."""
        integrand = self.values if weight is None else self.values * weight
        return complex(np.trapezoid(np.trapezoid(integrand, self.x, axis=1), self.y))


@dataclass(frozen=True)
class MomentFormulaResult:
    """Value of a truncated series together with its convergence status."""

    value: complex
    series_terms_used: int
    converged: bool
    divergent_reason: str | None = None

    def __post_init__(self) -> None:
        if not self.converged and self.divergent_reason is None:
            raise ValueError("a non-converged result must state its divergent_reason")


@dataclass(frozen=True)
class IntegrabilityDiagnosis:
    """Whether the Q0 average of the re-summed stochastic mean exists at time ``t``."""

    status: Literal["integrable", "unbounded"]
    t: float
    cos_2mut: float
    quadrature_value: complex | None = None
    closed_form_value: complex | None = None
    exact_value: complex | None = None

    @property
    def integrable(self) -> bool:
        return self.status == "integrable"

    @property
    def deviation(self) -> float | None:
        """``|quadrature - mean_a_exact|`` where the integral exists."""
        if self.quadrature_value is None or self.exact_value is None:
            return None
        return abs(self.quadrature_value - self.exact_value)


@dataclass(frozen=True)
class DiffusionPoint:
    alpha: complex
    alpha_plus: complex
    d_cross: complex
    d_abs_self: float

    @property
    def boundary(self) -> bool:
        return self.d_abs_self == 0.0 and self.d_cross.real == 0.0

    @property
    def negative(self) -> bool:
        return self.d_cross.real < self.d_abs_self


@dataclass(frozen=True)
class DiffusionReport:
    """Outcome of the negative-diffusion predicate over sample points."""

    points: tuple[DiffusionPoint, ...]

    @property
    def negative(self) -> bool:
        return all(point.negative for point in self.points)

    @property
    def boundary_points(self) -> tuple[DiffusionPoint, ...]:
        return tuple(point for point in self.points if point.boundary)


@dataclass(frozen=True)
class InitialMode:
    """How the start point of each trajectory is chosen."""

    kind: InitialKind
    point: complex

    @classmethod
    def fixed_beta(cls, beta: complex) -> "InitialMode":
        return cls("fixed_beta", complex(beta))

    @classmethod
    def sample_q0(cls, alpha0: complex) -> "InitialMode":
        return cls("sample_q0", complex(alpha0))

    @classmethod
    def delta_positive_p(cls, alpha0: complex) -> "InitialMode":
        return cls("delta_positive_p", complex(alpha0))


@dataclass(frozen=True)
class EnsembleConfig:
    """Parameters of one trajectory ensemble."""

    n_trajectories: int
    initial_mode: InitialMode
    t_final: float
    dt: float = 1e-4
    record_stride: int = 100
    divergence_threshold: float = 1e6
    master_seed: int = 42
    method: Method = "exact"
    chunk_size: int = 128
    max_chunk_elements: int = 2**22
    workers: int = 1
    noise_free: bool = False

    @property
    def n_steps(self) -> int:
        return max(1, round(self.t_final / self.dt))

    @property
    def record_steps(self) -> NDArray[np.int64]:
        steps = np.arange(0, self.n_steps + 1, self.record_stride, dtype=np.int64)
        if steps[-1] != self.n_steps:
            steps = np.append(steps, self.n_steps)
        return steps

    @property
    def times(self) -> RealArray:
        return self.record_steps.astype(np.float64) * self.dt


@dataclass(frozen=True, eq=False)
class MomentSeries:
    """Per-time ensemble estimates over surviving trajectories."""

    times: RealArray
    mean_alpha: ComplexArray
    stderr_re: RealArray
    stderr_im: RealArray
    mean_alphaplus_alpha: ComplexArray
    n_alive: NDArray[np.int64]
    divergence_times: RealArray
    n_trajectories: int
    truncated_at: float | None = None

    @property
    def bias_warning(self) -> NDArray[np.bool_]:
        """True wherever diverged trajectories were excluded from the estimate."""
        return self.n_alive < self.n_trajectories

    @property
    def stderr_alpha(self) -> RealArray:
        return np.hypot(self.stderr_re, self.stderr_im)

    def z_scores(self, reference: ComplexArray) -> RealArray:
        """Largest per-component deviation from ``reference`` in standard errors.

        Standard errors are floored at a few ulps of the compared values, so a spread-free
        ensemble sitting on its reference scores zero rather than rounding noise.
        """
        delta = self.mean_alpha - reference
        scale = np.fmax(np.abs(self.mean_alpha), np.abs(reference))
        floor = ROUNDING_ULPS * np.finfo(np.float64).eps * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            z_re = np.abs(delta.real) / np.maximum(self.stderr_re, floor)
            z_im = np.abs(delta.imag) / np.maximum(self.stderr_im, floor)
        z_re = np.where(np.abs(delta.real) <= floor, 0.0, z_re)
        z_im = np.where(np.abs(delta.imag) <= floor, 0.0, z_im)
        return np.fmax(z_re, z_im)


@dataclass(frozen=True, eq=False)
class ProductMomentSeries:
    """Mean and spread of ``alpha_plus * alpha`` with a variance trend test."""

    times: RealArray
    mean: ComplexArray
    stderr: RealArray
    variance: RealArray
    n_alive: NDArray[np.int64]
    slope: float
    slope_pvalue: float

    @property
    def variance_increasing(self) -> bool:
        """Least-squares slope positive at 95% one-sided confidence."""
        return bool(self.slope > 0 and self.slope_pvalue / 2 < 0.05)


@dataclass(frozen=True)
class DivergenceRow:
    beta: complex
    fraction_diverged: float
    median_divergence_time: float
    n_trajectories: int


@dataclass(frozen=True)
class DivergenceTable:
    t_final: float
    threshold: float
    rows: tuple[DivergenceRow, ...]

    def _medians_by_size(self) -> list[float]:
        ordered = sorted(self.rows, key=lambda row: abs(row.beta))
        return [row.median_divergence_time for row in ordered]

    @property
    def median_non_increasing(self) -> bool:
        """Median divergence time does not grow with ``|beta|^2``."""
        medians = self._medians_by_size()
        return all(b <= a for a, b in zip(medians, medians[1:]))

    @property
    def median_strictly_decreasing(self) -> bool:
        medians = self._medians_by_size()
        return all(b < a for a, b in zip(medians, medians[1:]))


@dataclass(frozen=True, eq=False)
class AveragingOrderReport:
    """Fixed-beta vs Q0-sampled ensembles against the analytic averages."""

    alpha0: complex
    mu: float
    times: RealArray
    fixed_beta: MomentSeries
    resummed: ComplexArray
    agreement_horizon: float
    q0_sampled: MomentSeries
    exact: ComplexArray
    q0_divergence_fraction: float
    q0_blowup_time: float | None
    ordered: ComplexArray
    ordered_max_error: float


@dataclass(frozen=True)
class QGridSummary:
    """Headline numbers of one sampled Q-function grid."""

    t: float
    maxima: tuple[complex, ...]
    total: float
    cat_fidelity: float | None = None


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved command-line run configuration."""

    command: Command
    mu: float = 1.0
    representation: Representation = "q"
    beta: complex = complex(0.001, 0.1)
    alpha0: complex = complex(1.0, 0.0)
    initial: InitialKind = "fixed_beta"
    n_traj: int = 50000
    t_final: float = 1.0
    dt: float = 1e-4
    stride: int = 100
    threshold: float = 1e6
    seed: int = 42
    method: Method = "exact"
    workers: int = 1
    chunk: int = 128
    times: tuple[float, ...] = ()
    t: tuple[float, ...] = ()
    extent: float = 6.0
    res: int = 256
    betas: tuple[complex, ...] = (complex(0.5), complex(1.0), complex(2.0))
    tolerance: float = 1e-12
    points: int = 100
    out: Path = Path("runs")
    format: OutputFormat = "csv"
    sources: dict[str, str] = field(default_factory=dict, compare=False)

    def to_manifest(self) -> dict[str, Any]:
        """JSON-safe view of every resolved value, complex numbers as ``a+bi`` text."""
        data = asdict(self)
        data.pop("sources")
        out: dict[str, Any] = {}
        for key, value in data.items():
            out[key] = _jsonable(value)
        out["sources"] = dict(self.sources)
        return out


def format_complex(value: complex) -> str:
    """Render ``value`` in the ``a+bi`` literal form accepted on the command line."""
    value = complex(value)
    sign = "-" if math.copysign(1.0, value.imag) < 0 else "+"
    return f"{value.real!r}{sign}{abs(value.imag)!r}i"


def _jsonable(value: Any) -> Any:
    if isinstance(value, complex):
        return format_complex(value)
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    return value

