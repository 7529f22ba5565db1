"""Unit tests for the adaptive Gauss-Legendre engine."""

import numpy as np
import pytest

from kernelzeros.errors import DomainError, QuadratureError
from kernelzeros.numerics.quadrature import adaptive_integrate, gauss_legendre_rule


def test_sine_integral() -> None:
    result = adaptive_integrate(np.sin, [0.0, np.pi], tol=1e-12)
    assert result.value == pytest.approx(2.0, abs=1e-12)
    assert result.error_estimate <= 1e-12
    assert result.panels >= 1


def test_breakpoints_split_initial_panels() -> None:
    """A kink placed on a breakpoint integrates as two smooth pieces."""
    result = adaptive_integrate(lambda x: np.abs(x - 0.3), [0.0, 0.3, 1.0], tol=1e-12)
    assert result.value == pytest.approx(0.5 * 0.3**2 + 0.5 * 0.7**2, abs=1e-12)


def test_peaked_integrand_refines() -> None:
    """∫ φ((x - 1/2)/0.01)/0.01 over [0, 1] is 1 to within the tail mass."""
    width = 0.01

    def peak(x):
        return np.exp(-0.5 * ((x - 0.5) / width) ** 2) / (width * np.sqrt(2 * np.pi))

    result = adaptive_integrate(peak, [0.0, 1.0], tol=1e-10)
    assert result.value == pytest.approx(1.0, abs=1e-9)
    assert result.panels > 1


def test_non_finite_integrand() -> None:
    with pytest.raises(QuadratureError) as exc_info:
        adaptive_integrate(lambda x: np.where(x > 0.5, np.nan, x), [0.0, 1.0])
    assert exc_info.value.details["point"] > 0.5


def test_panel_budget_exhausted() -> None:
    with pytest.raises(QuadratureError):
        adaptive_integrate(lambda x: np.abs(x - 1.0 / 3.0), [0.0, 1.0], tol=1e-15, max_panels=4)


def test_invalid_arguments() -> None:
    with pytest.raises(DomainError):
        adaptive_integrate(np.sin, [0.0, 1.0], tol=0.0)
    with pytest.raises(DomainError):
        adaptive_integrate(np.sin, [1.0, 1.0])


def test_rule_is_cached_and_frozen() -> None:
    nodes, weights = gauss_legendre_rule(5)
    assert gauss_legendre_rule(5)[0] is nodes
    assert weights.sum() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        nodes[0] = 0.0
