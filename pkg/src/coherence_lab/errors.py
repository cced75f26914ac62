"""Exception hierarchy shared by every module of the package."""


class CoherenceLabError(Exception):
    """Base class for all package errors."""


class ValidationError(CoherenceLabError, ValueError):
    """An input violates a documented invariant.

    ``magnitude`` carries the size of the violation when it is meaningful.
    """

    def __init__(self, message, magnitude=None):
        super().__init__(message)
        self.magnitude = magnitude


class NotHermitian(ValidationError):
    pass


class NotUnitTrace(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class InvalidDimension(ValidationError):
    pass


class NotPrime(ValidationError):
    pass


class NonpositiveBound(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class InvalidP(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
        self.line = line
        self.column = column


class ConvergenceFailure(CoherenceLabError, ArithmeticError):
    pass


class SolverFailure(CoherenceLabError, ArithmeticError):
    """The barrier method ran out of Newton steps before closing the gap."""

    def __init__(self, message, best_x=None, best_gap=None):
        super().__init__(message)
        self.best_x = best_x
        self.best_gap = best_gap


class InfeasibleStart(SolverFailure):
    pass
