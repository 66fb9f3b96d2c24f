"""
Exception types raised by the etpa package
"""


class EtpaError(Exception):
    """Base class for every error the library raises on purpose."""


class DomainError(EtpaError, ValueError):
    """An argument or parameter lies outside the domain of an operation."""


class ConvergenceError(EtpaError, ArithmeticError):
    """
    A quadrature ran out of its subdivision budget.

    The best estimate and its error bound are kept so callers can decide
    whether the value is still usable.
    """

    def __init__(self, message, estimate=float("nan"), error_bound=float("nan"), context=""):
        self.message = message
        self.estimate = estimate
        self.error_bound = error_bound
        self.context = context
        text = f"{message} [{context}]" if context else message
        super().__init__(f"{text} (estimate={estimate!r}, error bound={error_bound!r})")

    def with_context(self, context):
        '''returns a copy of this error with extra context prepended'''
        merged = f"{context}; {self.context}" if self.context else context
        return ConvergenceError(self.message, self.estimate, self.error_bound, merged)


class ScanError(EtpaError, RuntimeError):
    """Every point of a scan failed."""
