"""Unit tests for the derivative estimator and its exact moments."""

import numpy as np
import pytest

from kernelzeros.errors import (
    ConfigurationError,
    DegenerateProcessError,
    DomainError,
    HypothesisViolationError,
)
from kernelzeros.numerics.design import Design, regular_design, uniform_distribution
from kernelzeros.numerics.kernels import make_smoothing_kernel
from kernelzeros.numerics.smoother import (
    GPMoments,
    SmootherSpec,
    asymptotic_moments,
    bias_profile,
    coefficient_matrix,
    coefficient_vectors,
    estimate,
    exact_sigma_at,
    gp_moments,
    moment_grid,
)


class TestSmootherSpec:
    """Construction and validation of the estimator."""

    def test_canonical(self) -> None:
        spec = SmootherSpec.canonical(ell=2, h=0.2, noise_sd=0.1)
        assert spec.kernel == make_smoothing_kernel(2)
        assert spec.interior == (0.2, 0.8)
        assert spec.with_noise(0.3).noise_sd == 0.3

    @pytest.mark.parametrize("h", [0.0, 0.5, -0.1])
    def test_halfwidth_range(self, h: float) -> None:
        with pytest.raises(DomainError):
            SmootherSpec.canonical(ell=0, h=h, noise_sd=1.0)

    def test_noise_positive(self) -> None:
        with pytest.raises(DomainError):
            SmootherSpec.canonical(ell=0, h=0.1, noise_sd=0.0)

    def test_kernel_must_fit_order(self) -> None:
        """The Epanechnikov kernel has κ'(±1) ≠ 0, so it cannot estimate f'."""
        with pytest.raises(ConfigurationError):
            SmootherSpec(ell=1, h=0.1, kernel=make_smoothing_kernel(0), noise_sd=1.0)


def test_rows_sum_to_one(spec_l0: SmootherSpec, design_500: Design) -> None:
    """For ℓ = 0 each coefficient vector is a discretized ∫κ = 1."""
    grid = np.linspace(0.1, 0.9, 33)
    a = coefficient_matrix(spec_l0, design_500, grid)
    np.testing.assert_allclose(np.asarray(a.sum(axis=1)).ravel(), 1.0, atol=1e-3)


def test_row_support(spec_l0: SmootherSpec, design_500: Design) -> None:
    """Only points within h of t carry weight."""
    a, a_prime = coefficient_vectors(spec_l0, design_500, 0.5)
    outside = np.abs(design_500.points - 0.5) > 0.1
    assert np.all(a[outside] == 0.0)
    assert np.all(a_prime[outside] == 0.0)
    assert np.count_nonzero(a) > 0


@pytest.mark.parametrize("ell", [0, 1, 2])
def test_derivative_coefficients_match_finite_differences(ell: int, design_500: Design) -> None:
    """a' is d/dt of a, sign and scale included, away from the kernel's support edge."""
    spec = SmootherSpec.canonical(ell=ell, h=0.1, noise_sd=1.0)
    t, step = 0.5, 1e-5
    _, a_prime = coefficient_vectors(spec, design_500, t)
    upper, _ = coefficient_vectors(spec, design_500, t + step)
    lower, _ = coefficient_vectors(spec, design_500, t - step)
    inside = np.abs(design_500.points - t) < spec.h - 10 * step
    central = (upper - lower) / (2.0 * step)
    np.testing.assert_allclose(
        central[inside], a_prime[inside], rtol=1e-5, atol=1e-5 * np.max(np.abs(a_prime))
    )


@pytest.mark.parametrize("ell, expected", [(0, 2.0), (1, 2.0)])
def test_linear_truth_recovered(ell: int, expected: float) -> None:
    """f(t) = 2t + 1 gives f̂(1/2) = 2 and f̂'(1/2) = 2 up to discretization."""
    d = regular_design(1000, uniform_distribution())
    spec = SmootherSpec.canonical(ell=ell, h=0.1, noise_sd=1.0)
    y = 2.0 * d.points + 1.0
    assert estimate(spec, d, y, 0.5) == pytest.approx(expected, rel=1e-3)


def test_estimate_shapes(spec_l0: SmootherSpec, design_500: Design) -> None:
    y = np.ones(design_500.n)
    assert isinstance(estimate(spec_l0, design_500, y, 0.5), float)
    assert estimate(spec_l0, design_500, y, [0.3, 0.5]).shape == (2,)
    with pytest.raises(DomainError):
        estimate(spec_l0, design_500, y[:-1], 0.5)


def test_outside_interior(spec_l0: SmootherSpec, design_500: Design) -> None:
    with pytest.raises(DomainError):
        coefficient_matrix(spec_l0, design_500, [0.05])
    with pytest.raises(DomainError):
        coefficient_matrix(spec_l0, design_500, [0.5], derivative_order=2)


def test_moment_grid_default(spec_l0: SmootherSpec) -> None:
    """max(2048, 50 / h) points spanning [h, 1 - h]."""
    grid = moment_grid(spec_l0)
    assert grid.size == 2048
    assert grid[0] == pytest.approx(0.1) and grid[-1] == pytest.approx(0.9)


class TestGPMoments:
    """Exact moments and their validation."""

    def test_sigma_matches_coefficient_norm(self, spec_l0: SmootherSpec, design_500: Design, sine) -> None:
        grid = np.linspace(0.2, 0.8, 7)
        mom = gp_moments(spec_l0, design_500, sine, grid)
        for t, s in zip(grid, mom.sigma):
            assert s == pytest.approx(exact_sigma_at(spec_l0, design_500, t), rel=1e-12)

    def test_sigma_close_to_asymptote(self, spec_l0: SmootherSpec, design_500: Design, sine) -> None:
        grid = np.linspace(0.2, 0.8, 7)
        mom = gp_moments(spec_l0, design_500, sine, grid)
        sigma_asym, xi_asym = asymptotic_moments(spec_l0, design_500.dist, design_500.n, grid)
        np.testing.assert_allclose(mom.sigma, sigma_asym, rtol=1e-2)
        np.testing.assert_allclose(mom.xi, xi_asym, rtol=2e-2)

    def test_mean_tracks_truth(self, spec_l0: SmootherSpec, design_500: Design, sine) -> None:
        """Bias of a smooth truth is O(h²) for a symmetric kernel."""
        grid = np.linspace(0.1, 0.9, 41)
        bias = bias_profile(spec_l0, design_500, sine, sine, grid)
        assert np.max(np.abs(bias)) < 0.06

    def test_symmetric_kernel_decorrelates(self, spec_l0: SmootherSpec, design_500: Design, sine) -> None:
        """∫κκ' = 0, so Z and Z' are nearly uncorrelated on a regular design."""
        mom = gp_moments(spec_l0, design_500, sine, np.linspace(0.1, 0.9, 101))
        assert np.max(np.abs(mom.mu)) < 0.05
        np.testing.assert_allclose(mom.gamma, np.sqrt(1.0 - mom.mu**2))

    def test_eta_from_functions(self) -> None:
        """m = t, m' = 1 and unit, uncorrelated scales give η = 1."""
        mom = GPMoments.from_functions(np.linspace(0.0, 1.0, 11), m=lambda t: t, m_prime=1.0, sigma=1.0, xi=1.0)
        np.testing.assert_allclose(mom.eta, 1.0)
        np.testing.assert_allclose(mom.normalized_mean, mom.grid)

    def test_degenerate_sigma(self) -> None:
        with pytest.raises(DegenerateProcessError) as exc_info:
            GPMoments.from_functions(np.linspace(0.0, 1.0, 5), m=0.0, m_prime=0.0, sigma=lambda t: t, xi=1.0)
        assert exc_info.value.details["grid_point"] == 0.0

    def test_perfect_correlation(self) -> None:
        with pytest.raises(HypothesisViolationError):
            GPMoments.from_functions(np.linspace(0.0, 1.0, 5), m=0.0, m_prime=0.0, sigma=1.0, xi=1.0, mu=1.0)

    def test_grid_must_increase(self) -> None:
        with pytest.raises(DomainError):
            GPMoments.from_functions(np.array([0.0, 0.5, 0.5]), m=0.0, m_prime=0.0, sigma=1.0, xi=1.0)

    def test_table_dump(self, rice_moments: GPMoments) -> None:
        lines = rice_moments.to_table().splitlines()
        assert lines[0] == "s m m_prime sigma xi mu gamma eta"
        assert len(lines) == rice_moments.grid.size + 1

    def test_arrays_read_only(self, rice_moments: GPMoments) -> None:
        with pytest.raises(ValueError):
            rice_moments.sigma[0] = 2.0


def test_asymptotic_scalar(spec_l0: SmootherSpec) -> None:
    """σ_asym² = σ²‖κ‖²/(N h) with ‖κ‖² = 3/5 for ℓ = 0."""
    sigma_asym, xi_asym = asymptotic_moments(spec_l0, uniform_distribution(), 500, 0.5)
    assert isinstance(sigma_asym, float)
    assert sigma_asym == pytest.approx(0.5 * np.sqrt(0.6 / (500 * 0.1)))
    assert xi_asym == pytest.approx(0.5 * np.sqrt(1.5 / (500 * 0.1**3)))
