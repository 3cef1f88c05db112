"""Exception hierarchy shared by the numerical modules and the CLI."""

from __future__ import annotations


class CasimirError(Exception):
    """Base class for every error raised by the library."""


class DomainError(CasimirError, ValueError):
    """Input outside the mathematical or physical domain of an operation."""


class UnsupportedOrderError(DomainError):
    """Requested order (Bernoulli, polylogarithm) is not implemented."""


class PoleError(DomainError):
    """Quantity requested at a pole, e.g. beta coefficients where E_PFA vanishes."""


class BesselOverflowError(CasimirError, OverflowError):
    """Unscaled Bessel value is not representable; use the log-scaled table."""


class ConvergenceError(CasimirError, ArithmeticError):
    """A quadrature, series or Matsubara sum did not reach its tolerance."""

    def __init__(self, message: str, *, estimate: float | None = None, error: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
