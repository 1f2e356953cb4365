"""Exception hierarchy shared by all qgpr modules.

Two top-level families map onto the CLI exit-status contract:
``InputError`` (bad user/caller input, exit status 2) and ``NumericError``
(numerical or conditioning failures, exit status 3).
"""


class QgprError(Exception):
    """Base class for all package errors."""


class InputError(QgprError, ValueError):
    """Malformed or inconsistent input (dimensions, indices, files, config)."""


class ConfigError(InputError):
    """A QLA configuration is invalid for the matrix it targets."""


class ParseError(InputError):
    """A data file could not be parsed; carries the offending row."""

    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class NumericError(QgprError, ArithmeticError):
    """Numerical failure: non-finite values, lost positive-definiteness, ..."""


class NotPositiveDefiniteError(NumericError):
    """Cholesky factorization hit a non-positive pivot."""


class ConditioningError(NumericError):
    """System matrix is not invertible as assumed (smallest eigenvalue <= 0)."""


class ConvergenceError(NumericError):
    """Iterative solver exhausted its iteration budget."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ZeroProbabilityError(NumericError):
    """Projective measurement outcome has (numerically) zero probability."""


class ExpansionError(NumericError):
    """Series expansion of the inverse does not converge for this system."""
