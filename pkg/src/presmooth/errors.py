"""Exception hierarchy shared by all modules.

Each class maps onto one CLI exit code (see :mod:`presmooth.cli`).
"""


class PresmoothError(Exception):
    """Base class for all library errors."""


class ConfigurationError(PresmoothError, ValueError):
    """Inconsistent settings: non-dyadic grids, level mismatches, bad config keys."""


class InputError(PresmoothError, ValueError):
    """Malformed input data such as NaN samples."""


class DomainError(PresmoothError, ValueError):
    """A value lies outside the domain of a link or function space."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class IntegrabilityError(PresmoothError, ArithmeticError):
    """An integrand is non-finite somewhere inside its integration range."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class CapabilityError(PresmoothError, NotImplementedError):
    """The requested operation is not supported for this descriptor variant."""


class PreconditionError(PresmoothError, ValueError):
    """An operation was called outside its documented precondition."""
