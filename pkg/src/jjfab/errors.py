"""Exception hierarchy shared by all jjfab modules."""


class JJFabError(Exception):
    """Base class; the CLI maps every subclass to exit code 1."""


class DomainError(JJFabError, ValueError):
    """An input lies outside the domain of an operation."""


class ConfigError(JJFabError, ValueError):
    """A configuration is malformed, inconsistent or references unknown keys."""


class ShadowedPointError(DomainError):
    """The evaporation ray reaches the point from behind the wafer plane."""


class ZeroAreaError(DomainError):
    """A junction electrode is fully shadowed, leaving no overlap."""


class CalibrationError(JJFabError):
    """A calibration target cannot be reached inside the search bracket."""


class FitError(JJFabError, ValueError):
    """A least-squares fit received unusable data."""


class OptimizationError(JJFabError):
    """The objective was non-finite at every evaluated point."""


class ParseError(JJFabError, ValueError):
    """A measurement file could not be parsed; carries the location."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
