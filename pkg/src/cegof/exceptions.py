"""Exception hierarchy. Each class maps to one CLI exit code."""


class CegofError(Exception):
    """Base class for all package errors."""


class InputError(CegofError, ValueError):
    """Malformed or non-finite sample data."""


class DomainError(CegofError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ParameterError(CegofError, ValueError):
    """Invalid copula parameters."""


class ConfigError(CegofError, ValueError):
    """Unsupported option or option combination."""


class EstimationError(CegofError, RuntimeError):
    """A numerical estimate could not be produced."""


class BootstrapError(EstimationError):
    """Too many bootstrap replicates failed to fit."""
