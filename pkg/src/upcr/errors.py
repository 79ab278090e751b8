"""Exception types shared across the package."""


class UpcrError(Exception):
    """Base class for all errors raised by this package."""


class InputError(UpcrError):
    """Malformed or out-of-contract input: bad file, dimension mismatch,
    unknown regressor name, invalid configuration value."""


class NumericalError(UpcrError):
    """A computation could not be completed reliably, e.g. an
    ill-conditioned or degenerate matrix where the method needs a
    usable spectrum."""
