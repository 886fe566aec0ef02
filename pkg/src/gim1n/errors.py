"""Exception hierarchy shared by the library and the CLI."""


class GIM1Error(Exception):
    """Base class for every error raised by gim1n."""


class UnsupportedModelError(GIM1Error, ValueError):
    """The interarrival model lacks a quantity the computation needs."""


class DegenerateModelError(UnsupportedModelError):
    """The model collapses to a point mass at zero (or numerically close)."""


class OutOfRegimeError(GIM1Error, ValueError):
    """An asymptotic formula was requested outside its hypotheses.

    ``source`` carries the formula tag (``Eq35``, ``Eq313``, ...) so callers
    can report which result was refused.
    """

    def __init__(self, message, source=None):
        super().__init__(message if source is None else f"[{source}] {message}")
        self.source = source


class NumericalError(GIM1Error, ArithmeticError):
    """A numerical procedure failed to reach its declared tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ConvergenceError(NumericalError):
    """An iteration ran out of steps; ``estimate`` holds the last iterate."""
