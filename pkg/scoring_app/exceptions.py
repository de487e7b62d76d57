"""
Exception hierarchy shared by every app.

Management commands map ``InputError`` to exit code 1 and
``NumericalError`` to exit code 2.
"""


class EnsembleError(RuntimeError):
    """Base class for all irtensemble failures."""


class InputError(EnsembleError, ValueError):
    """Raised when an input violates a documented precondition."""


class NumericalError(EnsembleError):
    """Raised when a computation cannot produce a finite, meaningful result."""
