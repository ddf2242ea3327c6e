"""Exception types raised across the package."""


class HlmaxError(Exception):
    """Base class for all package errors."""


class DomainError(HlmaxError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConstructionError(HlmaxError, ValueError):
    """Parameters do not describe a valid space."""


class UnknownBoundError(HlmaxError, KeyError):
    """No analytic constant is tabulated for the requested combination."""


class BoundViolation(HlmaxError, AssertionError):
    """A proved constant was exceeded; carries a counterexample dump."""

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}
