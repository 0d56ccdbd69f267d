"""Exception hierarchy shared across the package."""


class TagrecError(Exception):
    """Base class for all package errors."""


class ValidationError(TagrecError):
    """Invalid input data or configuration."""


class NumericalError(TagrecError):
    """A numerical routine failed or produced an out-of-tolerance result."""


class ResourceError(TagrecError):
    """An operation would exceed a configured resource budget."""
