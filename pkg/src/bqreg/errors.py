"""Exception hierarchy.

Errors fall into three families that the command line maps onto exit codes:
usage problems (1), bad or insufficient data (2) and numerical failures (3).
"""


class BqregError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class UsageError(BqregError, ValueError):
    """Invalid arguments, configuration or manifest content."""

    exit_code = 1


class DataError(BqregError, ValueError):
    exit_code = 2


class MissingColumnError(DataError, KeyError):
    def __init__(self, column, where="dataset"):
        self.column = column
        super().__init__(f"column {column!r} not found in {where}")

    def __str__(self):
        return self.args[0]


class DegenerateSampleError(DataError):
    """The estimation sample is empty or too small for the requested model."""


class ParseError(DataError):
    def __init__(self, path, row, column, message):
        self.path, self.row, self.column = str(path), row, column
        super().__init__(f"{path}: row {row}, column {column!r}: {message}")


class DomainError(DataError):
    """A value lies outside the domain of a transform or density."""


class NumericalError(BqregError, ArithmeticError):
    exit_code = 3


class SingularDesignError(NumericalError):
    """Design or instrument matrix is (numerically) rank deficient."""


class SamplerDivergenceError(NumericalError):
    def __init__(self, iteration, message="non-finite draw"):
        self.iteration = iteration
        super().__init__(f"{message} at Gibbs iteration {iteration}")


class DegenerateVarianceError(NumericalError):
    """Bootstrap variance too small to form a Wald statistic."""


class InsufficientDrawsError(BqregError, ValueError):
    exit_code = 3
