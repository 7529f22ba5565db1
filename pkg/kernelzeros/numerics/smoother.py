"""Kernel derivative estimator and the exact moments of its Gaussian process.

The estimate of the ℓ-th derivative at t is a linear form in the responses,

    Z(t) = Σ a_i(t) y_i,   a_i(t) = w_i κ^{(ℓ)}((t - t_i)/h) / (N h^{ℓ+1} F'(t_i)),

and its time derivative uses κ^{(ℓ+1)} with one more power of h. With
Gaussian errors Z is a Gaussian process whose same-point moments follow from
the coefficient vectors exactly, so nothing here relies on asymptotics except
:func:`asymptotic_moments`, which exists to be compared against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse

from kernelzeros.config import get_settings
from kernelzeros.errors import (
    ConfigurationError,
    DegenerateProcessError,
    DomainError,
    HypothesisViolationError,
)
from kernelzeros.numerics.design import Design, LimitDistribution
from kernelzeros.numerics.kernels import (
    PolyKernel,
    derivative,
    evaluate,
    l2_norm_sq,
    make_smoothing_kernel,
    validate_kernel,
)
from kernelzeros.utils.decorators import with_module_context
from kernelzeros.utils.logger import log_performance, setup_logger

logger = setup_logger(__name__)

TruthFn = Callable[[NDArray[np.float64]], Any]
MomentInput = Union[float, Callable[[NDArray[np.float64]], Any]]

# slack on the interior check so grids built with linspace(h, 1-h) pass
_INTERIOR_SLACK = 1e-12


@dataclass(frozen=True)
class SmootherSpec:
    """Derivative order, halfwidth, kernel and noise level of the estimator.

    Attributes:
        ell: Derivative order ℓ
        h: Kernel halfwidth h_N in (0, 1/2)
        kernel: Kernel κ; must pass validate_kernel for ℓ
        noise_sd: Measurement-error standard deviation σ
    """

    ell: int
    h: float
    kernel: PolyKernel
    noise_sd: float

    def __post_init__(self) -> None:
        if self.ell < 0:
            raise DomainError(f"ℓ must be nonnegative, got {self.ell}")
        if not 0.0 < self.h < 0.5:
            raise DomainError(f"halfwidth must lie in (0, 1/2), got {self.h}")
        if not self.noise_sd > 0.0:
            raise DomainError(f"noise sd must be positive, got {self.noise_sd}")
        report = validate_kernel(self.kernel, self.ell)
        if not report.passed:
            names = ", ".join(c.name for c in report.failures)
            raise ConfigurationError(
                f"kernel fails its conditions for ℓ={self.ell}: {names}",
                details={c.name: c.value for c in report.failures},
            )

    @classmethod
    def canonical(cls, ell: int, h: float, noise_sd: float) -> "SmootherSpec":
        """Spec using the normalized (1 - s²)^{ℓ+1} kernel."""
        return cls(ell=ell, h=h, kernel=make_smoothing_kernel(ell), noise_sd=noise_sd)

    @property
    def interior(self) -> Tuple[float, float]:
        """The estimation region [h, 1 - h]."""
        return (self.h, 1.0 - self.h)

    def with_noise(self, noise_sd: float) -> "SmootherSpec":
        """Same estimator, different σ."""
        return SmootherSpec(ell=self.ell, h=self.h, kernel=self.kernel, noise_sd=noise_sd)


def _check_interior(spec: SmootherSpec, t: NDArray[np.float64]) -> None:
    lo, hi = spec.interior
    if t.size and (t.min() < lo - _INTERIOR_SLACK or t.max() > hi + _INTERIOR_SLACK):
        raise DomainError(
            f"evaluation times must lie in [{lo:g}, {hi:g}]",
            details={"min": float(t.min()), "max": float(t.max())},
        )


def moment_grid(spec: SmootherSpec, size: Optional[int] = None) -> NDArray[np.float64]:
    """
    Equispaced grid on [h, 1 - h].

    The default size is max(moment_grid_min, moment_grid_per_halfwidth / h).
    """
    if size is None:
        numerics = get_settings().numerics
        size = max(numerics.moment_grid_min, int(np.ceil(numerics.moment_grid_per_halfwidth / spec.h)))
    if size < 2:
        raise DomainError(f"moment grid needs at least 2 points, got {size}")
    lo, hi = spec.interior
    return np.linspace(lo, hi, size)


def coefficient_matrix(
    spec: SmootherSpec,
    d: Design,
    grid: ArrayLike,
    derivative_order: int = 0,
) -> sparse.csr_matrix:
    """
    Coefficient vectors for a whole grid as a sparse (len(grid), N) matrix.

    Row j holds a(grid[j]) for ``derivative_order=0`` and a'(grid[j]) for
    ``derivative_order=1``. Only design points with |t - t_i| ≤ h enter a row.

    Args:
        spec: Estimator
        d: Design
        grid: Evaluation times in [h, 1 - h]
        derivative_order: 0 for Z, 1 for Z'

    Returns:
        CSR matrix A with Z(grid) = A @ y
    """
    if derivative_order not in (0, 1):
        raise DomainError(f"derivative_order must be 0 or 1, got {derivative_order}")
    t = np.atleast_1d(np.asarray(grid, dtype=float))
    _check_interior(spec, t)

    j = spec.ell + derivative_order
    kern = derivative(spec.kernel, j)
    scale = 1.0 / (d.n * spec.h ** (j + 1))

    points = d.points
    lo = np.searchsorted(points, t - spec.h, side="left")
    hi = np.searchsorted(points, t + spec.h, side="right")
    counts = hi - lo
    total = int(counts.sum())

    rows = np.repeat(np.arange(t.size), counts)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    cols = np.arange(total) - starts + np.repeat(lo, counts)

    point_weight = d.weights / np.asarray(d.dist.density(points), dtype=float)
    s = (t[rows] - points[cols]) / spec.h
    values = np.asarray(evaluate(kern, s), dtype=float) * point_weight[cols] * scale
    return sparse.csr_matrix((values, (rows, cols)), shape=(t.size, d.n))


def coefficient_vectors(
    spec: SmootherSpec, d: Design, t: float
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Dense coefficient vectors (a, a') at a single time.

    Example:
        ```python
        a, a_prime = coefficient_vectors(spec, design, 0.5)
        z = a @ y
        ```
    """
    a = coefficient_matrix(spec, d, [t], 0).toarray()[0]
    a_prime = coefficient_matrix(spec, d, [t], 1).toarray()[0]
    return a, a_prime


def estimate(spec: SmootherSpec, d: Design, y: ArrayLike, t: ArrayLike) -> Union[float, NDArray[np.float64]]:
    """
    The derivative estimate Σ a_i(t) y_i at one or many times.

    Raises:
        DomainError: If len(y) differs from the design size
    """
    y_arr = np.asarray(y, dtype=float)
    if y_arr.shape != (d.n,):
        raise DomainError(f"expected {d.n} responses, got shape {y_arr.shape}")
    t_arr = np.asarray(t, dtype=float)
    values = coefficient_matrix(spec, d, np.atleast_1d(t_arr)) @ y_arr
    if t_arr.ndim == 0:
        return float(values[0])
    return values


def _sample(value: MomentInput, grid: NDArray[np.float64]) -> NDArray[np.float64]:
    if callable(value):
        return np.broadcast_to(np.asarray(value(grid), dtype=float), grid.shape).copy()
    return np.full(grid.shape, float(value))


@dataclass(frozen=True)
class GPMoments:
    """Same-point moments of Z and Z' on a grid.

    Attributes:
        grid: Sorted evaluation times
        m: E[Z]
        m_prime: d/ds E[Z] = E[Z']
        sigma: sd of Z
        xi: sd of Z'
        mu: Corr[Z, Z']
        gamma: √(1 - μ²)
        eta: (m' - ξμm/σ) / (ξγ)
    """

    grid: NDArray[np.float64]
    m: NDArray[np.float64]
    m_prime: NDArray[np.float64]
    sigma: NDArray[np.float64]
    xi: NDArray[np.float64]
    mu: NDArray[np.float64]
    gamma: NDArray[np.float64] = field(init=False)
    eta: NDArray[np.float64] = field(init=False)

    def __post_init__(self) -> None:
        arrays: Dict[str, NDArray[np.float64]] = {}
        for name in ("grid", "m", "m_prime", "sigma", "xi", "mu"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise DomainError(f"moment array '{name}' must be one-dimensional")
            arrays[name] = arr
        grid = arrays["grid"]
        if any(a.shape != grid.shape for a in arrays.values()):
            raise DomainError("moment arrays must share the grid's shape")
        if grid.size < 2 or np.any(np.diff(grid) <= 0.0):
            raise DomainError("moment grid must be strictly increasing with at least 2 points")

        sigma, xi, mu = arrays["sigma"], arrays["xi"], arrays["mu"]
        for name, arr in (("sigma", sigma), ("xi", xi)):
            bad = np.flatnonzero(~(arr > 0.0))
            if bad.size:
                s = float(grid[bad[0]])
                raise DegenerateProcessError(
                    f"{name} vanishes at s={s:.6g}",
                    details={"grid_point": s, "count": int(bad.size)},
                )
        bad = np.flatnonzero(np.abs(mu) >= 1.0 - 1e-12)
        if bad.size:
            s = float(grid[bad[0]])
            raise HypothesisViolationError(
                f"|μ| = 1 at s={s:.6g}; Z and Z' are perfectly correlated",
                details={"grid_point": s, "mu": float(mu[bad[0]])},
            )

        gamma = np.sqrt(1.0 - mu * mu)
        eta = (arrays["m_prime"] - xi * mu * arrays["m"] / sigma) / (xi * gamma)
        for name, arr in arrays.items():
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        gamma.flags.writeable = False
        eta.flags.writeable = False
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "eta", eta)

    @classmethod
    def from_functions(
        cls,
        grid: ArrayLike,
        m: MomentInput,
        m_prime: MomentInput,
        sigma: MomentInput,
        xi: MomentInput,
        mu: MomentInput = 0.0,
    ) -> "GPMoments":
        """
        Moments of a synthetic process given as constants or vectorized callables.

        σ' is taken to be μξ, so a non-constant σ must be paired with the
        matching μ for the interpolated profile to be consistent.

        Example:
            ```python
            mom = GPMoments.from_functions(
                np.linspace(0.0, np.pi, 513), m=0.0, m_prime=0.0, sigma=1.0, xi=1.0
            )
            ```
        """
        g = np.asarray(grid, dtype=float)
        return cls(
            grid=g,
            m=_sample(m, g),
            m_prime=_sample(m_prime, g),
            sigma=_sample(sigma, g),
            xi=_sample(xi, g),
            mu=_sample(mu, g),
        )

    @property
    def sigma_prime(self) -> NDArray[np.float64]:
        """dσ/ds = Cov[Z, Z'] / σ = μξ."""
        return self.mu * self.xi

    @property
    def normalized_mean(self) -> NDArray[np.float64]:
        """M = m / σ."""
        return self.m / self.sigma

    def columns(self) -> Dict[str, NDArray[np.float64]]:
        """Named columns in output order."""
        return {
            "s": self.grid,
            "m": self.m,
            "m_prime": self.m_prime,
            "sigma": self.sigma,
            "xi": self.xi,
            "mu": self.mu,
            "gamma": self.gamma,
            "eta": self.eta,
        }

    def to_table(self, float_format: Optional[str] = None) -> str:
        """Columnar text dump with a header line."""
        fmt = float_format or get_settings().output.float_format
        cols = self.columns()
        lines = [" ".join(cols)]
        stacked = np.column_stack(list(cols.values()))
        lines.extend(" ".join(format(v, fmt) for v in row) for row in stacked)
        return "\n".join(lines) + "\n"


@with_module_context("smoother")
@log_performance(logger, "gp_moments", threshold_seconds=5.0)
def gp_moments(
    spec: SmootherSpec,
    d: Design,
    f: TruthFn,
    grid: Optional[ArrayLike] = None,
) -> GPMoments:
    """
    Exact moments of Z = f̂^{(ℓ)} on a grid.

    m = A f, m' = A' f, σ² = σ_ε² Σ a_i², ξ² = σ_ε² Σ a'_i²,
    Cov = σ_ε² Σ a_i a'_i and μ = Cov / (σξ).

    Args:
        spec: Estimator
        d: Design
        f: Vectorized truth function
        grid: Evaluation times in [h, 1 - h]; defaults to :func:`moment_grid`

    Returns:
        GPMoments on the grid

    Raises:
        DegenerateProcessError: σ or ξ vanishes at a grid point
        HypothesisViolationError: |μ| = 1 at a grid point
    """
    g = moment_grid(spec) if grid is None else np.asarray(grid, dtype=float)
    a = coefficient_matrix(spec, d, g, 0)
    a_prime = coefficient_matrix(spec, d, g, 1)
    f_values = np.asarray(f(d.points), dtype=float)

    var_scale = spec.noise_sd**2
    sigma_sq = var_scale * np.asarray(a.multiply(a).sum(axis=1)).ravel()
    xi_sq = var_scale * np.asarray(a_prime.multiply(a_prime).sum(axis=1)).ravel()
    cov = var_scale * np.asarray(a.multiply(a_prime).sum(axis=1)).ravel()

    sigma = np.sqrt(sigma_sq)
    xi = np.sqrt(xi_sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where((sigma > 0.0) & (xi > 0.0), cov / (sigma * xi), 0.0)

    logger.debug(
        "Computed process moments",
        extra={"extra_fields": {"grid_size": int(g.size), "n": d.n, "h": spec.h, "ell": spec.ell}},
    )
    return GPMoments(grid=g, m=a @ f_values, m_prime=a_prime @ f_values, sigma=sigma, xi=xi, mu=mu)


def asymptotic_moments(
    spec: SmootherSpec, dist: LimitDistribution, n: int, t: ArrayLike
) -> Tuple[Union[float, NDArray[np.float64]], Union[float, NDArray[np.float64]]]:
    """
    Leading-order sd of Z and Z'.

    σ_asym² = σ²‖κ^{(ℓ)}‖² / (N F'(t) h^{2ℓ+1}),
    ξ_asym² = σ²‖κ^{(ℓ+1)}‖² / (N F'(t) h^{2ℓ+3}).

    Returns:
        (sigma_asym, xi_asym), scalars for scalar t
    """
    t_arr = np.asarray(t, dtype=float)
    _check_interior(spec, np.atleast_1d(t_arr))
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    ell, h = spec.ell, spec.h
    density = np.asarray(dist.density(t_arr), dtype=float)
    base = spec.noise_sd**2 / (n * density)
    sigma_sq = base * l2_norm_sq(derivative(spec.kernel, ell)) / h ** (2 * ell + 1)
    xi_sq = base * l2_norm_sq(derivative(spec.kernel, ell + 1)) / h ** (2 * ell + 3)
    sigma_asym, xi_asym = np.sqrt(sigma_sq), np.sqrt(xi_sq)
    if t_arr.ndim == 0:
        return float(sigma_asym), float(xi_asym)
    return sigma_asym, xi_asym


def exact_sigma_at(spec: SmootherSpec, d: Design, t: float) -> float:
    """Finite-sample sd of Z(t): σ_ε ‖a(t)‖."""
    a = coefficient_matrix(spec, d, [t], 0)
    return float(spec.noise_sd * np.sqrt(a.multiply(a).sum()))


def bias_profile(
    spec: SmootherSpec,
    d: Design,
    f: TruthFn,
    f_ell: TruthFn,
    grid: ArrayLike,
) -> NDArray[np.float64]:
    """E[f̂^{(ℓ)}] - f^{(ℓ)} on a grid."""
    g = np.asarray(grid, dtype=float)
    mean = coefficient_matrix(spec, d, g, 0) @ np.asarray(f(d.points), dtype=float)
    return mean - np.asarray(f_ell(g), dtype=float)
