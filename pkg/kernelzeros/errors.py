"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`KernelZerosError` and carries the process exit code the CLI maps it
to, plus the numeric module it was raised in when known.
"""

from typing import Any, Dict, Optional


class KernelZerosError(Exception):
    """Base class for all package errors."""

    exit_code: int = 2

    def __init__(
        self,
        message: str,
        *,
        module: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        """
        Initialize the error.

        Args:
            message: Human-readable description
            module: Numeric module the failure originated in
            details: Diagnostic values (grid point, tolerance, ...)
        """
        self.message = message
        self.module = module
        self.details = details or {}
        super().__init__(message)

    def __str__(self) -> str:
        """Prefix the message with the module context when present."""
        if self.module:
            return f"[{self.module}] {self.message}"
        return self.message


class ConfigurationError(KernelZerosError):
    """Invalid scenario, settings, command line, or distribution."""

    exit_code = 1

    def __init__(
        self,
        message: str,
        *,
        line: Optional[int] = None,
        source: Optional[str] = None,
        **kwargs: Any,
    ):
        self.line = line
        self.source = source
        if line is not None:
            message = f"{source or '<config>'}:{line}: {message}"
        super().__init__(message, **kwargs)


class NumericError(KernelZerosError):
    """A numeric computation could not produce a trustworthy result."""

    exit_code = 2


class QuadratureError(NumericError):
    """Adaptive quadrature did not reach its tolerance."""


class DegenerateProcessError(NumericError):
    """σ or ξ vanishes at a grid point, so the zero-crossing formulas do not apply."""


class HypothesisViolationError(NumericError):
    """|μ| = 1 somewhere: the Leadbetter-Cryer hypotheses fail."""


class DegenerateProfileError(NumericError):
    """M(t) vanishes on a subinterval; zeros are not isolated."""


class ConsistencyError(NumericError):
    """Two routes to the same quantity disagree beyond tolerance."""


class DegenerateChangePointError(NumericError):
    """f^(ℓ+1) vanishes at a declared change point."""


class DomainError(KernelZerosError, ValueError):
    """Argument outside the domain of an operation."""

    exit_code = 2


class PreconditionError(KernelZerosError):
    """A theorem hypothesis the caller relied on fails on the data."""

    exit_code = 2


class AcceptanceError(KernelZerosError):
    """An analytic prediction and its empirical counterpart disagree (--check)."""

    exit_code = 3
