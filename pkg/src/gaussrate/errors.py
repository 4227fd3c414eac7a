from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .channel import ValidationReport


class GaussRateError(Exception):
    """Base class for every error raised by the toolkit.

    ``exit_code`` is the process status the CLI uses when the error escapes a
    command.
    """

    exit_code = 1


class InputError(GaussRateError):
    """Raised when an input document is malformed or misses a field."""

    exit_code = 1


class SizeError(GaussRateError, ValueError):
    """Raised when matrix or mode dimensions do not fit the operation."""

    exit_code = 1


class DomainError(GaussRateError, ValueError):
    """Raised when an argument lies outside the mathematical domain."""

    exit_code = 2


class ParameterError(DomainError):
    """Raised when a (class label, tau, nbar) combination is inconsistent."""


class InvalidChannelError(DomainError):
    """Raised when (T, N, d) violates the complete-positivity condition."""

    def __init__(self, report: ValidationReport) -> None:
        super().__init__("invalid channel: " + "; ".join(report.violations))
        self.report = report


class UnsupportedRegimeError(GaussRateError):
    """Raised for key-rate requests at tau = 1, which the bounds exclude."""

    exit_code = 3


class NumericalError(GaussRateError):
    """Raised when a numerical construction misses its tolerance."""

    exit_code = 4

    def __init__(self, message: str, residual: float | None = None) -> None:
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class DecompositionError(NumericalError):
    """Raised when a channel cannot be brought to canonical form numerically."""


class DilationError(NumericalError):
    """Raised when a symplectic completion fails its residual check."""
