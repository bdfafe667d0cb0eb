"""Exceptions raised by the YIG magnetometer simulator."""

from __future__ import annotations


class YigMagnetometerError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(YigMagnetometerError):
    """Invalid or incomplete scenario configuration."""


class ParseError(ConfigError):
    """Malformed input file. Carries the offending line."""

    def __init__(self, source: str, line: int, message: str) -> None:
        super().__init__(f"{source}:{line}: {message}")
        self.source = source
        self.line = line


class NumericalError(YigMagnetometerError, ValueError):
    """Input is well formed but the computation cannot proceed."""


class PhysicalDomainError(NumericalError):
    pass


class InvalidMeasurementError(NumericalError):
    pass


class ParameterError(NumericalError):
    pass


class FitError(NumericalError):
    pass


class NonConvergenceError(FitError):
    pass


class DegenerateDataError(FitError):
    pass


class NyquistError(NumericalError):
    pass


class AliasingError(NyquistError):
    pass


class UnwrapIntegrityError(NumericalError):
    pass


class RecordTooShortError(NumericalError):
    pass


class BinNotFoundError(NumericalError):
    pass


class StageError(YigMagnetometerError):
    """A pipeline stage failed; ``cause`` is the module error it raised."""

    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"{stage} stage failed: {cause}")
        self.stage = stage
        self.cause = cause
