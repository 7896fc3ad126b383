"""Exception hierarchy for kerrq.

Every error raised on purpose by the library derives from ``KerrqError`` so the CLI can
map configuration problems and science failures onto distinct exit codes.
"""


class KerrqError(Exception):
    """Base class for all kerrq errors."""


class NoiseConfigError(KerrqError, ValueError):
    """Raised when a noise configuration is invalid (non-positive mu or dt, bad sign)."""


class InsufficientSamplesError(KerrqError):
    """Raised when a statistic is requested from too few noise increments."""


class CoefficientError(KerrqError):
    """Raised when a Langevin coefficient function cannot be evaluated."""


class TruncationError(KerrqError):
    """Raised when a Fock truncation would exceed the configured cap."""


class QuadratureExtentError(KerrqError):
    """Raised when a phase-space grid is too small for a quadrature."""

    def __init__(self, message: str, suggested_extent: float) -> None:
        super().__init__(f"{message} (suggested extent >= {suggested_extent:.3g})")
        self.suggested_extent = suggested_extent


class EnsembleError(KerrqError):
    """Raised when an ensemble run is misconfigured."""


class ConfigError(KerrqError):
    """Raised when a run configuration cannot be parsed or validated.

    Args:
        key: Offending configuration key (``None`` for structural errors)
        message: Human-readable description
        line: 1-based line in the config file, when the key came from a file
    """

    def __init__(self, key: str | None, message: str, line: int | None = None) -> None:
        where = ""
        if key is not None:
            where = f"{key}: "
        if line is not None:
            where = f"line {line}: {where}"
        super().__init__(f"{where}{message}")
        self.key = key
        self.line = line
