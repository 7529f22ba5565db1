"""Unit tests for the builtin truths and their change points."""

import numpy as np
import pytest

from kernelzeros.errors import ConfigurationError, DomainError
from kernelzeros.numerics.truths import (
    LogisticBumpTruth,
    PolynomialTruth,
    SineTruth,
    available_truths,
    build_truth,
)


def test_available_truths() -> None:
    assert available_truths() == ["logistic-bump", "polynomial", "sine"]


@pytest.mark.parametrize(
    "truth, ell, expected",
    [
        (SineTruth(), 0, (0.5,)),
        (SineTruth(), 1, (0.25, 0.75)),
        (SineTruth(frequency=2.0), 2, (0.25, 0.5, 0.75)),
        (PolynomialTruth([0.0, 0.0, 0.0, 1.0], center=0.5), 2, (0.5,)),
        (LogisticBumpTruth(), 1, (0.5,)),
        (LogisticBumpTruth(), 0, ()),
    ],
    ids=["sine-l0", "sine-l1", "sine2-l2", "cubic-l2", "bump-l1", "bump-l0"],
)
def test_change_points(truth, ell: int, expected: tuple) -> None:
    assert truth.change_points(ell) == pytest.approx(expected)


def test_degenerate_root_dropped() -> None:
    """(t - 1/2)³ has a zero at 1/2 with vanishing derivative: not a change point."""
    cubic = PolynomialTruth([0.0, 0.0, 0.0, 1.0], center=0.5)
    assert cubic.change_points(0) == ()
    assert cubic.change_points(1) == ()


def test_change_points_restricted_to_interval() -> None:
    assert SineTruth(frequency=2.0).change_points(0, lo=0.3, hi=1.0) == pytest.approx((0.5, 0.75))


def test_constant_polynomial_has_none() -> None:
    assert PolynomialTruth([0.0]).change_points(0) == ()


@pytest.mark.parametrize(
    "truth",
    [SineTruth(amplitude=0.7, frequency=1.5, phase=0.2), LogisticBumpTruth(0.5, 0.4, 0.08), PolynomialTruth([1, -2, 0.5, 3])],
    ids=["sine", "bump", "poly"],
)
@pytest.mark.parametrize("order", [0, 1, 2])
def test_derivatives_match_finite_differences(truth, order: int) -> None:
    t = np.linspace(0.1, 0.9, 9)
    step = 1e-5
    numeric = (truth.derivative(order, t + step) - truth.derivative(order, t - step)) / (2 * step)
    np.testing.assert_allclose(truth.derivative(order + 1, t), numeric, rtol=1e-5, atol=1e-5)


def test_scalar_evaluation() -> None:
    sine = SineTruth()
    assert isinstance(sine(0.25), float)
    assert sine(0.25) == pytest.approx(1.0)
    assert sine.derivative_fn(1)(0.0) == pytest.approx(2 * np.pi)


def test_negative_order() -> None:
    with pytest.raises(DomainError):
        SineTruth().derivative(-1, 0.5)
    with pytest.raises(DomainError):
        SineTruth().change_points(-1)


def test_build_truth() -> None:
    cubic = build_truth("polynomial", coeffs=[0, 0, 0, 1], center=0.5)
    assert cubic.change_points(2) == pytest.approx((0.5,))
    assert cubic.describe() == "polynomial(coeffs=[0.0, 0.0, 0.0, 1.0], center=0.5)"


@pytest.mark.parametrize(
    "name, params",
    [("cauchy", {}), ("sine", {"period": 2.0}), ("sine", {"frequency": 0.0}), ("polynomial", {"coeffs": []})],
    ids=["unknown", "bad-keyword", "bad-frequency", "empty-coeffs"],
)
def test_build_truth_errors(name: str, params: dict) -> None:
    with pytest.raises(ConfigurationError):
        build_truth(name, **params)
