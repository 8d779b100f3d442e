"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations

from typing import Optional

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class PoseFlcError(Exception):
    """Base class for every error raised by pose_flc."""


class ConfigurationError(PoseFlcError, ValueError):
    """Invalid configuration, parameter file or scenario."""


class ParamsParseError(ConfigurationError):
    """Malformed key/value file."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = path or "<input>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


class CoverageError(ConfigurationError):
    """A fuzzy partition leaves part of its universe with zero membership."""

    def __init__(self, variable: str, interval: tuple[float, float]):
        self.variable = variable
        self.interval = interval
        super().__init__(
            f"{variable} partition does not cover [{interval[0]:.6g}, {interval[1]:.6g}]"
        )


class DegenerateMeasurementError(PoseFlcError, ValueError):
    """A measured direction is too short to normalize."""


class NumericalFailure(PoseFlcError, RuntimeError):
    """Filter state or cost became non-finite."""


def exit_code_for(exc: BaseException) -> Optional[int]:
    """Map an exception to the CLI exit code, None when it is not ours to map."""
    if isinstance(exc, ConfigurationError):
        return EXIT_CONFIG
    if isinstance(exc, (NumericalFailure, DegenerateMeasurementError, FloatingPointError)):
        return EXIT_NUMERICAL
    return None
