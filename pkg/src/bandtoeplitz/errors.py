"""Exception types shared across the package.

Each class carries the CLI exit code it maps to.
"""


class BandToeplitzError(Exception):
    exit_code = 1


class DegreeLimitError(BandToeplitzError, ValueError):
    exit_code = 3


class SizeLimitError(BandToeplitzError, ValueError):
    exit_code = 3


class QuadratureError(BandToeplitzError, ArithmeticError):
    exit_code = 6

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SolverError(BandToeplitzError, ArithmeticError):
    exit_code = 6

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class MemoryBudgetError(BandToeplitzError, MemoryError):
    exit_code = 4


class SchemaError(BandToeplitzError, ValueError):
    exit_code = 5
