"""Unit tests for change-point predictions."""

import numpy as np
import pytest

from kernelzeros.errors import DegenerateChangePointError, DomainError, PreconditionError
from kernelzeros.numerics.changepoints import (
    PILOT_HALFWIDTH_CAP,
    ChangePointProblem,
    admissibility_diagnostics,
    default_tail_window,
    expected_false_changepoints,
    noise_for_signal_level,
    pilot_halfwidth,
    sigma_if,
    signal_level,
    tail_bound,
)
from kernelzeros.numerics.crossings import H
from kernelzeros.numerics.design import regular_design
from kernelzeros.numerics.smoother import SmootherSpec, asymptotic_moments
from kernelzeros.numerics.truths import PolynomialTruth, SineTruth


def _problem(truth, ell: int, n: int, h: float, target_z: float, uniform) -> ChangePointProblem:
    canonical = SmootherSpec.canonical(ell=ell, h=h, noise_sd=1.0)
    x0 = truth.change_points(ell, h, 1.0 - h)[0]
    noise = noise_for_signal_level(truth, x0, canonical, uniform, n, target_z)
    return ChangePointProblem.from_truth(truth, canonical.with_noise(noise), uniform, n)


@pytest.fixture
def inflection(uniform) -> ChangePointProblem:
    """(t - 1/2)³ with ℓ = 2, N = 2000, h = 0.1 and z = 1."""
    cubic = PolynomialTruth([0.0, 0.0, 0.0, 1.0], center=0.5)
    return _problem(cubic, ell=2, n=2000, h=0.1, target_z=1.0, uniform=uniform)


class TestInflection:
    """One change point at 1/2 with f''' = 6."""

    def test_noise_level(self, inflection: ChangePointProblem) -> None:
        assert inflection.spec.noise_sd == pytest.approx(0.003024, rel=1e-3)
        assert inflection.change_points == (0.5,)
        assert inflection.k == 1
        assert inflection.next_derivative(0) == pytest.approx(6.0)

    def test_signal_level_round_trip(self, inflection: ChangePointProblem) -> None:
        assert signal_level(inflection, 0) == pytest.approx(1.0, rel=1e-10)

    def test_predicted_excess(self, inflection: ChangePointProblem) -> None:
        prediction = expected_false_changepoints(inflection)
        assert prediction.excess == pytest.approx(2.0 * H(1.0))
        assert prediction.excess == pytest.approx(0.16663, abs=1e-5)
        assert prediction.order_term_flag
        (row,) = prediction.diagnostics
        assert row.location == 0.5
        assert row.z == pytest.approx(1.0)

    def test_sigma_if(self, inflection: ChangePointProblem, uniform) -> None:
        sigma_asym, _ = asymptotic_moments(inflection.spec, uniform, 2000, 0.5)
        assert sigma_if(inflection, 0) == pytest.approx(sigma_asym / 6.0)
        exact = sigma_if(inflection, 0, design=regular_design(2000, uniform))
        assert exact == pytest.approx(sigma_if(inflection, 0), rel=2e-2)

    def test_index_out_of_range(self, inflection: ChangePointProblem) -> None:
        with pytest.raises(DomainError):
            sigma_if(inflection, 1)

    def test_tail_bound(self, inflection: ChangePointProblem) -> None:
        s = sigma_if(inflection, 0)
        w = 4.0 * s
        bound = tail_bound(inflection, w)
        assert bound.value == pytest.approx((s / 0.1) * np.exp(-8.0))
        assert bound.per_change_point == pytest.approx([bound.value])
        assert bound.width == w

    def test_tail_bound_warnings(self, inflection: ChangePointProblem) -> None:
        bound = tail_bound(inflection, 0.01)
        assert any("h/w" in message for message in bound.warnings)
        with pytest.raises(DomainError):
            tail_bound(inflection, 0.0)

    def test_default_window_rate_term(self, inflection: ChangePointProblem) -> None:
        """For ℓ = 2 at N = 2000 the w² N h⁵ ≥ 1 requirement sets the width."""
        w = default_tail_window(inflection)
        assert w == pytest.approx(1.0 / np.sqrt(2000 * 0.1**5))
        assert tail_bound(inflection, w).warnings == []


def test_default_window_spread_term(uniform) -> None:
    """sin(2πt) with ℓ = 0 at z = 1: σ_if = h‖κ‖/‖κ'‖ = h√0.4 and 4σ_if dominates."""
    problem = _problem(SineTruth(), ell=0, n=1000, h=0.1, target_z=1.0, uniform=uniform)
    w = default_tail_window(problem)
    assert w == pytest.approx(4.0 * sigma_if(problem, 0))
    assert w == pytest.approx(0.4 * np.sqrt(0.4), rel=1e-6)
    bound = tail_bound(problem, w)
    assert bound.warnings == []
    assert bound.value == pytest.approx(np.sqrt(0.4) * np.exp(-8.0), rel=1e-6)

    def test_admissibility(self, inflection: ChangePointProblem, uniform) -> None:
        report = admissibility_diagnostics(inflection, regular_design(2000, uniform))
        assert report["h_rate"] == pytest.approx(0.1 * 2000 ** (1.0 / 7.0))
        assert report["first_moment"] == 0.0
        assert report["discrepancy_ratio"] == pytest.approx(np.sqrt(2000 * 0.1) / 4000)


def test_three_equal_change_points(uniform) -> None:
    """sin(4πt) with ℓ = 2 has three change points of equal slope: excess 6 H(1.5)."""
    problem = _problem(SineTruth(1.0, 2.0), ell=2, n=5000, h=0.04, target_z=1.5, uniform=uniform)
    assert problem.change_points == pytest.approx((0.25, 0.5, 0.75))
    prediction = expected_false_changepoints(problem)
    assert [d.z for d in prediction.diagnostics] == pytest.approx([1.5, 1.5, 1.5])
    assert prediction.excess == pytest.approx(0.1172, abs=1e-4)


def test_no_change_points(uniform) -> None:
    spec = SmootherSpec.canonical(ell=0, h=0.1, noise_sd=0.5)
    problem = ChangePointProblem.from_truth(PolynomialTruth([1.0, 1.0]), spec, uniform, 500)
    prediction = expected_false_changepoints(problem)
    assert prediction.excess == 0.0
    assert prediction.warnings
    assert tail_bound(problem, 0.2).value == 0.0


def test_degenerate_change_point(uniform) -> None:
    """(t - 1/2)³ has f''(1/2) = 0, so 1/2 is not a 1-change point."""
    spec = SmootherSpec.canonical(ell=1, h=0.1, noise_sd=0.5)
    cubic = PolynomialTruth([0.0, 0.0, 0.0, 1.0], center=0.5)
    with pytest.raises(DegenerateChangePointError):
        ChangePointProblem(truth=cubic, change_points=(0.5,), spec=spec, dist=uniform, n=500)
    with pytest.raises(DegenerateChangePointError):
        noise_for_signal_level(cubic, 0.5, spec, uniform, 500, 1.0)


def test_zero_on_region_edge(uniform) -> None:
    spec = SmootherSpec.canonical(ell=0, h=0.25, noise_sd=0.5)
    with pytest.raises(PreconditionError):
        ChangePointProblem.from_truth(SineTruth(frequency=2.0), spec, uniform, 500)


def test_noise_for_signal_level_domain(uniform) -> None:
    spec = SmootherSpec.canonical(ell=0, h=0.1, noise_sd=1.0)
    with pytest.raises(DomainError):
        noise_for_signal_level(SineTruth(), 0.5, spec, uniform, 500, 0.0)


class TestPilotHalfwidth:
    """safety · ln N · N^(-1/(2ℓ+3)), clamped below 1/2."""

    def test_function_estimation(self) -> None:
        assert pilot_halfwidth(0, 10**6) == pytest.approx(0.1382, abs=1e-4)

    @pytest.mark.parametrize("n", [10**4, 10**6])
    def test_clamped(self, n: int) -> None:
        assert pilot_halfwidth(2, n) == PILOT_HALFWIDTH_CAP

    def test_safety_scales(self) -> None:
        assert pilot_halfwidth(0, 10**6, safety=2.0) == pytest.approx(2.0 * pilot_halfwidth(0, 10**6))

    @pytest.mark.parametrize(
        "ell, n, safety", [(0, 1, 1.0), (0, 100, 0.5), (-1, 100, 1.0)], ids=["n", "safety", "ell"]
    )
    def test_invalid(self, ell: int, n: int, safety: float) -> None:
        with pytest.raises(DomainError):
            pilot_halfwidth(ell, n, safety)
