"""Exception hierarchy."""


class MomentIndexError(Exception):
    """Base class for every error raised by this package."""


class ContractError(MomentIndexError, ValueError):
    """An argument violates an operation's precondition."""


class MomentRangeError(MomentIndexError, OverflowError):
    """A value does not fit the requested numeric representation."""


class NotPositiveDefiniteError(MomentIndexError, ArithmeticError):
    """Cholesky/LDL factorization met a non-positive pivot.

    ``pivot`` is the 0-based index of the first failing pivot; for a moment
    section it equals the rank of the leading block that still factorizes.
    """

    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite (pivot {pivot})")


class FiniteSupportError(NotPositiveDefiniteError):
    """A moment section that must be positive definite is singular."""

    def __init__(self, order: int, measure: str = "measure", module: str = ""):
        self.order = order
        self.measure = measure
        self.module = module
        where = f"{module}: " if module else ""
        super().__init__(
            order,
            f"{where}{measure} has finite support: moment section of order {order} "
            "is not positive definite",
        )


class ConfigError(MomentIndexError, ValueError):
    """A run configuration failed to parse or validate."""
