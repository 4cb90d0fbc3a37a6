"""Exception hierarchy shared by all tomobell modules.

Two broad families matter to callers: ``DomainError`` (bad inputs or
configuration, CLI exit code 2) and ``AccuracyError`` (a computation that ran
but failed its own convergence or consistency checks, CLI exit code 3).
"""


class TomobellError(Exception):
    """Base class for all package errors."""


class DomainError(TomobellError, ValueError):
    """Input outside the validated range of an operation."""


class UnsupportedStateError(DomainError):
    """Operation asked for a state kind it does not handle."""


class DimensionError(DomainError):
    """Mismatched matrix/operator dimensions."""


class ConfigError(DomainError):
    """Invalid run configuration (CLI or quadrature settings)."""


class AccuracyError(TomobellError):
    """A numerical result failed its stated accuracy contract."""


class ConvergenceError(AccuracyError):
    """Refinement or series summation did not converge within its budget."""


class NormalizationError(AccuracyError):
    """A probability or density failed its normalization check."""


class EnvelopeError(AccuracyError):
    """Rejection-sampling envelope was violated by the target density."""
