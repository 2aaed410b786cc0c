"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class ChainsmithError(Exception):
    """Base class for all errors raised by chainsmith."""


class InvalidChain(ChainsmithError, ValueError):
    pass


class SpectrumMismatch(ChainsmithError, ValueError):
    pass


class InvalidWeights(ChainsmithError, ValueError):
    pass


class InvalidSpectrum(ChainsmithError, ValueError):
    pass


class InvalidTarget(ChainsmithError, ValueError):
    pass


class NumericalBreakdown(ChainsmithError, ArithmeticError):
    pass


class NoValidRoot(ChainsmithError):
    pass


class RootNotBracketed(ChainsmithError, ValueError):
    pass


class PatternMismatch(ChainsmithError, ValueError):
    pass


class DegenerateMoment(ChainsmithError, ArithmeticError):
    pass


class UnsupportedTarget(ChainsmithError, ValueError):
    pass


class ConvergenceFailure(ChainsmithError):
    """Iterative solve did not reach tolerance.

    ``best`` carries the best iterate seen (whatever object the solver
    produces), ``residual`` its residual norm.
    """

    def __init__(self, message: str, best=None, residual: float = float("nan")):
        super().__init__(message)
        self.best = best
        self.residual = residual
