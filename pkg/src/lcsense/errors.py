"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An argument violates a documented precondition."""


class CorruptStream(ValueError):
    """An LC event stream violates its ordering or range invariants."""


class Underdetermined(ValueError):
    """Fewer measurements than requested nonzero coefficients."""
