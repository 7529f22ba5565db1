"""Unit tests for the exact polynomial kernels."""

from fractions import Fraction

import numpy as np
import pytest

from kernelzeros.errors import ConfigurationError, DomainError
from kernelzeros.numerics.kernels import (
    PolyKernel,
    derivative,
    evaluate,
    kernel_norm_ratio,
    l2_norm_sq,
    l2_norm_sq_exact,
    make_smoothing_kernel,
    validate_kernel,
)
from kernelzeros.numerics.quadrature import gauss_legendre_rule


@pytest.mark.parametrize("ell", [0, 1, 2, 3, 4])
def test_smoothing_kernel_passes_all_checks(ell: int) -> None:
    """The canonical kernel meets every condition exactly."""
    report = validate_kernel(make_smoothing_kernel(ell), ell)
    assert report.passed
    assert report.failures == []
    # mass, first moment, and two boundary checks per derivative order
    assert len(report.checks) == 2 + 2 * (ell + 1)


def test_epanechnikov_coefficients() -> None:
    """ℓ = 0 gives the Epanechnikov kernel 3/4 (1 - s²)."""
    k = make_smoothing_kernel(0)
    assert k.coeffs == (Fraction(3, 4), Fraction(0), Fraction(-3, 4))
    assert k.moment(0) == 1
    assert k.moment(1) == 0


def test_epanechnikov_fails_boundary_for_ell_one() -> None:
    """κ' of the Epanechnikov kernel is ∓3/2 at ±1, so it cannot serve ℓ = 1."""
    report = validate_kernel(make_smoothing_kernel(0), 1)
    assert not report.passed
    failed = {c.name for c in report.failures}
    assert failed == {"boundary_j1"}
    assert {c.value for c in report.failures} == {"3/2", "-3/2"}


def test_asymmetric_kernel_reports_first_moment() -> None:
    """A kernel with nonzero ∫sκ is reported, not rejected by raising."""
    k = PolyKernel(coeffs=(Fraction(1, 2), Fraction(3, 4)))
    report = validate_kernel(k, 0)
    names = {c.name for c in report.failures}
    assert "first_moment" in names
    assert "moment" not in names


def test_derivative_exact() -> None:
    """d/ds of 3/4 (1 - s²) is -3/2 s."""
    dk = derivative(make_smoothing_kernel(0), 1)
    assert dk.coeffs == (Fraction(0), Fraction(-3, 2))
    assert derivative(make_smoothing_kernel(0), 2).coeffs == (Fraction(-3, 2),)


def test_derivative_out_of_range() -> None:
    with pytest.raises(DomainError):
        derivative(make_smoothing_kernel(0), 3)


def test_evaluate_zero_outside_support() -> None:
    """Evaluation is vectorized and vanishes outside [-1, 1]."""
    k = make_smoothing_kernel(1)
    values = evaluate(k, np.array([-1.5, -1.0, 0.0, 1.0, 2.0]))
    assert values[0] == 0.0 and values[-1] == 0.0
    assert values[1] == pytest.approx(0.0, abs=1e-15)
    assert values[2] == pytest.approx(15.0 / 16.0)
    assert isinstance(evaluate(k, 0.25), float)


def test_l2_norm_epanechnikov() -> None:
    """∫ (3/4 (1 - s²))² = 3/5."""
    assert l2_norm_sq_exact(make_smoothing_kernel(0)) == Fraction(3, 5)
    assert l2_norm_sq(make_smoothing_kernel(0)) == pytest.approx(0.6)


@pytest.mark.parametrize("ell", range(7))
def test_l2_norm_matches_quadrature(ell: int) -> None:
    """Exact norms of κ^(j), j ≤ ℓ + 1, against a Gauss-Legendre rule exact for their squares."""
    nodes, weights = gauss_legendre_rule(32)
    kernel = make_smoothing_kernel(ell)
    for j in range(ell + 2):
        k = derivative(kernel, j)
        numeric = float(weights @ np.asarray(evaluate(k, nodes)) ** 2)
        assert numeric == pytest.approx(l2_norm_sq(k), rel=1e-12), j


def test_norm_ratio_epanechnikov() -> None:
    """‖κ'‖² = 3/2 and ‖κ‖² = 3/5, so the ratio is √(5/2)."""
    assert kernel_norm_ratio(make_smoothing_kernel(0), 0) == pytest.approx(np.sqrt(2.5))


def test_kernel_record_round_trip() -> None:
    k = make_smoothing_kernel(2)
    assert PolyKernel.from_dict(k.to_dict()) == k


def test_kernel_record_malformed() -> None:
    with pytest.raises(ConfigurationError):
        PolyKernel.from_dict({"coeffs": [[1, 0]]})
    with pytest.raises(ConfigurationError):
        PolyKernel.from_dict({"order": 1})


def test_negative_order_rejected() -> None:
    with pytest.raises(DomainError):
        make_smoothing_kernel(-1)
