"""Exception hierarchy shared across the package."""


class SubembedError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(SubembedError):
    """An ensemble or experiment descriptor is invalid."""


class InputError(SubembedError):
    """An argument violates a documented precondition."""


class DegenerateInputError(InputError):
    """Numerically degenerate input (e.g. an all-zero spanning set)."""


class DimensionError(InputError):
    """Mismatched or out-of-range dimensions."""


class ResourceError(SubembedError):
    """A size or cardinality budget would be exceeded."""
