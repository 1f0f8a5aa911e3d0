"""Exception hierarchy shared by every module."""


class RelayError(Exception):
    """Base class for all library errors."""


class DomainError(RelayError, ValueError):
    """Argument outside the mathematical domain of a function."""


class UnsupportedOrderError(DomainError):
    pass


class SeriesRangeError(DomainError):
    """Argument outside the convergence window of a series evaluation."""


class OutOfRangeError(DomainError):
    """Target value outside the range an evaluator can reach."""


class ValidationError(RelayError, ValueError):
    """Invalid configuration, matrix or probability."""


class DegeneracyError(RelayError):
    """Eigenvalues are not distinct enough for the partial-fraction formulas."""


class NumericalError(RelayError, ArithmeticError):
    """Quadrature or root finding failed to converge."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        return f"{base} ({details})"


class InsufficientDataError(RelayError):
    """Too few usable Monte-Carlo points for a regression."""
