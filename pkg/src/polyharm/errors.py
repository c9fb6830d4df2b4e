"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PrecisionRangeError(ArithmeticError):
    """An argument exceeds the range where the series evaluation keeps its digits."""


class ConvergenceError(ArithmeticError):
    """An iterative method did not converge."""


class ConsistencyError(RuntimeError):
    """An internal self-check failed (e.g. determinant phase drift)."""


class ConditioningError(ArithmeticError):
    """A factorization broke down because the discretization is too ill-conditioned."""
