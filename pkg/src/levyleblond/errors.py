"""Exception and warning types shared across the package."""


class LevyLeblondError(Exception):
    """Base class for library errors."""


class DimensionMismatchError(LevyLeblondError, ValueError):
    """Operands live in algebras or lattices of different dimension."""


class ConstraintError(LevyLeblondError, ValueError):
    """A parameter constraint is violated.

    Attributes
    ----------
    constraint : str
        Machine-readable name of the violated constraint, e.g. ``"theta_bound"``.
    """

    def __init__(self, message: str, constraint: str):
        super().__init__(message)
        self.constraint = constraint


class ZeroModeError(LevyLeblondError, ValueError):
    """A singular-at-zero multiplier was applied to data with a nonzero mean."""


class DecompositionError(LevyLeblondError, ValueError):
    """Blade content cannot be expressed in the requested Witt decomposition."""


class ConsistencyError(LevyLeblondError, ArithmeticError):
    """An internal consistency check failed (e.g. a negative squared norm)."""


class CapExceededError(LevyLeblondError, ValueError):
    """A dense matrix would exceed the configured row cap."""


class TailTruncationWarning(UserWarning):
    """Sampled data does not decay at the end of the window but a zero tail was assumed."""
