"""Measurement designs, their limiting distribution, and star discrepancy.

A design is the set of measurement locations t_i with weights w_i together
with the distribution F their empirical distribution F_N converges to. The
star discrepancy D*_N = sup_t |F_N(t) - F(t)| controls how well sums over the
design approximate integrals against dF (the generalized Koksma inequality).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, optimize, stats

from kernelzeros.config import get_settings
from kernelzeros.errors import ConfigurationError, DomainError, PreconditionError, QuadratureError
from kernelzeros.models.reports import KoksmaGap
from kernelzeros.utils.logger import setup_logger

logger = setup_logger(__name__)

ArrayFn = Callable[[Any], Any]


@dataclass(frozen=True)
class LimitDistribution:
    """Limiting distribution F of the design points on [0, 1].

    Attributes:
        name: Builtin identifier or a user label
        density: F'(t), vectorized
        cdf: F(t), vectorized
        lower: c_F, lower bound of the density on [0, 1]
        upper: C_F, upper bound of the density on [0, 1]
        ppf: Optional closed-form inverse of F; bisection is used without it
        params: Parameters the distribution was built from
    """

    name: str
    density: ArrayFn
    cdf: ArrayFn
    lower: float
    upper: float
    ppf: Optional[ArrayFn] = None
    params: Dict[str, float] = field(default_factory=dict)

    @property
    def satisfies_bounds(self) -> bool:
        """True when 0 < c_F ≤ C_F < ∞."""
        return 0.0 < self.lower <= self.upper < np.inf

    def check(self, n_grid: int = 10_001) -> Dict[str, float]:
        """
        Report the density bounds and the endpoint values of F on a dense grid.

        Returns:
            Dict with observed min/max density, F(0), F(1) and the smallest
            increment of F over the grid
        """
        grid = np.linspace(0.0, 1.0, n_grid)
        dens = np.asarray(self.density(grid), dtype=float)
        cdf = np.asarray(self.cdf(grid), dtype=float)
        return {
            "density_min": float(dens.min()),
            "density_max": float(dens.max()),
            "cdf_at_0": float(cdf[0]),
            "cdf_at_1": float(cdf[-1]),
            "min_increment": float(np.diff(cdf).min()),
            "lower": self.lower,
            "upper": self.upper,
        }

    def inverse(self, u: ArrayLike) -> NDArray[np.float64]:
        """
        F^{-1}(u) for u in [0, 1].

        Uses the closed form when available, otherwise bisection on [0, 1]
        to the configured tolerance.

        Raises:
            ConfigurationError: If the numeric cdf is not monotone
        """
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any((u_arr < 0.0) | (u_arr > 1.0)):
            raise DomainError("cdf inversion requires u in [0, 1]")
        if self.ppf is not None:
            return np.clip(np.asarray(self.ppf(u_arr), dtype=float), 0.0, 1.0)

        report = self.check()
        if report["min_increment"] < 0.0 or abs(report["cdf_at_0"]) > 1e-12 or abs(
            report["cdf_at_1"] - 1.0
        ) > 1e-12:
            raise ConfigurationError(
                f"cdf of distribution '{self.name}' is not a monotone map of [0,1] onto [0,1]",
                details=report,
            )

        xtol = get_settings().numerics.ppf_xtol
        out = np.empty_like(u_arr)
        for i, target in enumerate(u_arr):
            if target <= 0.0:
                out[i] = 0.0
            elif target >= 1.0:
                out[i] = 1.0
            else:
                out[i] = optimize.bisect(
                    lambda t: float(self.cdf(t)) - target, 0.0, 1.0, xtol=xtol, maxiter=200
                )
        return out


def uniform_distribution() -> LimitDistribution:
    """F(t) = t."""
    return LimitDistribution(
        name="uniform",
        density=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        cdf=lambda t: np.asarray(t, dtype=float),
        lower=1.0,
        upper=1.0,
        ppf=lambda u: np.asarray(u, dtype=float),
    )


def linear_distribution(a: float = 1.0, b: float = 0.0) -> LimitDistribution:
    """
    Density proportional to a + b t on [0, 1].

    a = 0, b > 0 gives F(t) = t², whose density vanishes at 0; such a
    distribution is accepted but reports ``satisfies_bounds == False``.
    """
    if a < 0.0 or a + b < 0.0 or a + b / 2.0 <= 0.0:
        raise ConfigurationError(f"linear density needs a ≥ 0, a+b ≥ 0, a+b/2 > 0 (a={a}, b={b})")
    z = a + b / 2.0

    def ppf(u: Any) -> Any:
        u = np.asarray(u, dtype=float)
        # rationalized root of (b/2) t² + a t - u z = 0
        denom = a + np.sqrt(np.maximum(a * a + 2.0 * b * u * z, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(denom > 0.0, 2.0 * u * z / denom, 0.0)

    return LimitDistribution(
        name="linear",
        density=lambda t: (a + b * np.asarray(t, dtype=float)) / z,
        cdf=lambda t: (a * np.asarray(t, dtype=float) + 0.5 * b * np.asarray(t, dtype=float) ** 2) / z,
        lower=min(a, a + b) / z,
        upper=max(a, a + b) / z,
        ppf=ppf,
        params={"a": a, "b": b},
    )


def truncnormal_distribution(mean: float = 0.5, sd: float = 0.3) -> LimitDistribution:
    """Normal(mean, sd²) truncated to [0, 1]."""
    if sd <= 0.0:
        raise ConfigurationError(f"truncnormal sd must be positive, got {sd}")
    frozen = stats.truncnorm(a=(0.0 - mean) / sd, b=(1.0 - mean) / sd, loc=mean, scale=sd)
    candidates = [0.0, 1.0] + ([mean] if 0.0 <= mean <= 1.0 else [])
    dens = frozen.pdf(np.array(candidates))
    return LimitDistribution(
        name="truncnormal",
        density=frozen.pdf,
        cdf=frozen.cdf,
        lower=float(dens.min()),
        upper=float(dens.max()),
        ppf=frozen.ppf,
        params={"mean": mean, "sd": sd},
    )


_BUILTIN_DISTRIBUTIONS: Dict[str, Callable[..., LimitDistribution]] = {
    "uniform": uniform_distribution,
    "linear": linear_distribution,
    "truncnormal": truncnormal_distribution,
}


def build_distribution(name: str, **params: float) -> LimitDistribution:
    """
    Build a builtin distribution by identifier.

    Raises:
        ConfigurationError: Unknown identifier or bad parameters
    """
    try:
        factory = _BUILTIN_DISTRIBUTIONS[name]
    except KeyError:
        raise ConfigurationError(
            f"Unknown distribution '{name}'. Available: {', '.join(sorted(_BUILTIN_DISTRIBUTIONS))}"
        ) from None
    try:
        return factory(**params)
    except TypeError as e:
        raise ConfigurationError(f"Bad parameters for distribution '{name}': {e}") from e


@dataclass(frozen=True)
class Design:
    """Measurement locations and weights with their limiting distribution.

    Attributes:
        points: Sorted t_i in [0, 1]
        weights: Strictly positive w_i
        dist: Limiting distribution F
    """

    points: NDArray[np.float64]
    weights: NDArray[np.float64]
    dist: LimitDistribution

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if points.ndim != 1 or points.size == 0:
            raise DomainError("design needs a nonempty 1-d array of points")
        if weights.shape != points.shape:
            raise DomainError(f"{weights.size} weights for {points.size} points")
        if np.any(np.diff(points) < 0.0):
            raise DomainError("design points must be sorted")
        if points[0] < 0.0 or points[-1] > 1.0:
            raise DomainError("design points must lie in [0, 1]")
        if np.any(weights <= 0.0):
            raise DomainError("design weights must be strictly positive")
        points.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        """Number of design points N."""
        return int(self.points.size)

    def with_weights(self, weights: ArrayLike) -> "Design":
        """Same points and distribution, new weights."""
        return Design(points=self.points, weights=np.asarray(weights, dtype=float), dist=self.dist)

    def weight_deviation(self) -> float:
        """max |w_i - 1| / D*_N, the constant of the weight hypothesis."""
        return float(np.max(np.abs(self.weights - 1.0)) / star_discrepancy(self))

    def to_table(self) -> str:
        """Columnar text dump: one 't w' line per point."""
        lines = ["t w"]
        lines.extend(f"{t!r} {w!r}" for t, w in zip(self.points.tolist(), self.weights.tolist()))
        return "\n".join(lines) + "\n"


def regular_design(n: int, dist: LimitDistribution) -> Design:
    """
    Points at the interior quantiles F^{-1}((i - 1/2)/n), i = 1..n, unit weights.

    Args:
        n: Number of points
        dist: Limiting distribution

    Returns:
        Design whose star discrepancy is exactly 1/(2n)
    """
    if n < 1:
        raise DomainError(f"design size must be at least 1, got {n}")
    u = (np.arange(1, n + 1) - 0.5) / n
    return Design(points=np.sort(dist.inverse(u)), weights=np.ones(n), dist=dist)


def random_design(n: int, dist: LimitDistribution, seed: int) -> Design:
    """
    Points F^{-1}(U_i) with U_i i.i.d. uniform from a seeded generator, sorted.

    Args:
        n: Number of points
        dist: Limiting distribution
        seed: Generator seed; equal seeds give identical designs
    """
    if n < 1:
        raise DomainError(f"design size must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    return Design(points=np.sort(dist.inverse(u)), weights=np.ones(n), dist=dist)


def star_discrepancy(d: Design) -> float:
    """
    Exact D*_N = sup_t |F_N(t) - F(t)|.

    F_N is a right-continuous step function, so the supremum is attained at
    a left or right limit of a jump; ties between points are handled because
    the last (first) member of a tied group dominates the right (left) limit.
    """
    u = np.asarray(d.dist.cdf(np.sort(d.points)), dtype=float)
    n = u.size
    i = np.arange(1, n + 1, dtype=float)
    right = i / n - u
    left = u - (i - 1.0) / n
    return float(max(right.max(), left.max(), 0.0))


def total_variation(grid: ArrayLike, values: ArrayLike) -> float:
    """
    Σ |g(t_{j+1}) - g(t_j)| over a sorted grid.

    This is a lower bound to the true total variation; it is exact for
    functions monotone between grid points.
    """
    grid_arr = np.asarray(grid, dtype=float)
    vals = np.asarray(values, dtype=float)
    if grid_arr.shape != vals.shape:
        raise DomainError("grid and values must have the same shape")
    if np.any(np.diff(grid_arr) < 0.0):
        raise DomainError("grid must be sorted")
    return float(np.sum(np.abs(np.diff(vals))))


def koksma_gap(
    g: ArrayFn,
    g_tv: float,
    g_sup: float,
    d: Design,
    weight_const: float,
    breakpoints: Optional[Sequence[float]] = None,
) -> KoksmaGap:
    """
    Both sides of the generalized Koksma inequality.

    |∫ g dF - (1/N) Σ g(t_i) w_i| ≤ (‖g‖_TV + C ‖g‖_∞) D*_N
    whenever |w_i - 1| ≤ C D*_N.

    Args:
        g: Integrand, vectorized
        g_tv: Total variation of g on [0, 1]
        g_sup: Sup norm of g on [0, 1]
        d: Design
        weight_const: The constant C of the weight hypothesis
        breakpoints: Kinks of g passed to the quadrature

    Returns:
        KoksmaGap with lhs and bound

    Raises:
        PreconditionError: If the weight hypothesis fails
        QuadratureError: If ∫ g dF does not converge to 1e-10
    """
    disc = star_discrepancy(d)
    deviation = float(np.max(np.abs(d.weights - 1.0)))
    if deviation > weight_const * disc * (1.0 + 1e-12):
        raise PreconditionError(
            f"weight hypothesis fails: max|w-1| = {deviation:.3e} > C·D* = {weight_const * disc:.3e}",
            details={"max_weight_deviation": deviation, "discrepancy": disc},
        )

    result = integrate.quad(
        lambda t: float(g(t)) * float(d.dist.density(t)),
        0.0,
        1.0,
        epsabs=1e-10,
        epsrel=1e-10,
        limit=500,
        points=breakpoints,
        full_output=1,
    )
    if len(result) == 4:
        raise QuadratureError(
            f"∫ g dF did not converge: {result[3]}", details={"abserr": float(result[1])}
        )
    integral = float(result[0])
    discrete = float(np.mean(np.asarray(g(d.points), dtype=float) * d.weights))
    return KoksmaGap(
        lhs=abs(integral - discrete),
        bound=(g_tv + weight_const * g_sup) * disc,
        discrepancy=disc,
        integral=integral,
        discrete_sum=discrete,
    )
