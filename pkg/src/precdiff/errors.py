"""Exception hierarchy.

Each class carries the process exit code the CLI reports for it.
"""


class PrecDiffError(Exception):
    exit_code = 4


class InvalidArgumentError(PrecDiffError, ValueError):
    exit_code = 2


class IngestionError(InvalidArgumentError):
    """Malformed input file; ``row``/``col`` are 1-based file positions."""

    def __init__(self, message, row=None, col=None):
        if row is not None:
            loc = f"row {row}" if col is None else f"(row {row}, col {col})"
            message = f"{message} at {loc}"
        super().__init__(message)
        self.row = row
        self.col = col


class DegenerateError(PrecDiffError, ArithmeticError):
    exit_code = 3


class DegenerateColumnError(DegenerateError):
    def __init__(self, index, message=None):
        super().__init__(message or f"column {index} has zero variance")
        self.index = index


class DegenerateVarianceError(DegenerateError):
    def __init__(self, index, message=None):
        super().__init__(
            message or f"residual variance of variable {index} is not positive")
        self.index = index


class ConvergenceError(DegenerateError):
    def __init__(self, message, gap):
        super().__init__(f"{message} (final KKT violation {gap:.3e})")
        self.gap = gap


class InternalConsistencyError(PrecDiffError):
    exit_code = 4
