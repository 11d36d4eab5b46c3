"""Exception hierarchy shared by the solvers and the command line."""


class ModelError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(ModelError, ValueError):
    pass


class InvalidInput(ModelError, ValueError):
    pass


class SingularMatrix(ModelError, ArithmeticError):
    pass


class NonFiniteObjective(ModelError, ArithmeticError):
    pass


class MaxIterationsExceeded(ModelError, RuntimeError):
    """An iterative routine hit its iteration cap.

    ``residual`` holds the last convergence measure and ``result`` the best
    iterate found so far (when one exists).
    """

    def __init__(self, message, residual=float("nan"), result=None):
        super().__init__(message)
        self.residual = residual
        self.result = result


class InfeasibleBudget(ModelError, ValueError):
    pass


class NoInteriorOptimum(ModelError, ValueError):
    pass


class NonMonotoneValue(ModelError, RuntimeError):
    pass


class NonMonotoneUnclamped(NonMonotoneValue):
    pass


class AllReject(ModelError, RuntimeError):
    pass


class AllAccept(ModelError, RuntimeError):
    pass


class DegenerateMass(ModelError, RuntimeError):
    pass


class NegativeDensity(ModelError, RuntimeError):
    pass


class SolverFailure(ModelError, RuntimeError):
    """Wraps a solver error with the year it occurred in."""

    def __init__(self, message, year=None, cause=None):
        super().__init__(message)
        self.year = year
        self.cause = cause


class TimeoutExceeded(ModelError, RuntimeError):
    pass


class ConfigError(ModelError, ValueError):
    pass


class UnknownKey(ConfigError):
    def __init__(self, key):
        super().__init__(f"unknown configuration key: {key}")
        self.key = key


class DomainError(ConfigError):
    def __init__(self, field, bound, value):
        super().__init__(f"{field}={value!r} violates {bound}")
        self.field = field
        self.bound = bound
        self.value = value


class ParseError(ConfigError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class TailMassWarning(UserWarning):
    """Folded tail mass of a discretized density exceeds the tolerated share."""
