"""Expected number of zeros of a Gaussian process from its same-point moments.

Two routes are implemented. The classic integral

    E[N_z] = ∫ (ξγ/σ) φ(m/σ) Q(η) ds

and the decomposition obtained by writing Q(z) = |z| + Q̃(z): the |η| part
integrates to the total variation of Φ(-|M|), M = m/σ, which is a weighted
sum over the zeros and the extrema of |M|, so

    E[N_z] = N_z^0 + Σ ν_j Φ(-m_j) - Σ ν̂_j Φ(-M_j) + ∫ (ξγ/σ) φ(M) Q̃(η) ds.

Both routes run on a :class:`MomentProfile` interpolating the moment grid.
m and σ are interpolated with their exact derivatives, so M' is the exact
derivative of the interpolated M and the two routes agree to quadrature
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize, special
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from kernelzeros.config import get_settings
from kernelzeros.errors import ConsistencyError, DegenerateProfileError, DomainError, PreconditionError
from kernelzeros.models.reports import CorollaryBound, CrossingReport
from kernelzeros.numerics.quadrature import QuadratureResult, adaptive_integrate
from kernelzeros.numerics.smoother import GPMoments
from kernelzeros.utils.decorators import with_module_context
from kernelzeros.utils.logger import log_performance, setup_logger

logger = setup_logger(__name__)

Real = Union[float, NDArray[np.float64]]

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)

# |M| at or below this is treated as an exact zero
_ZERO_TOL = 1e-12
# maximum panels taken straight from the moment grid
_MAX_INITIAL_PANELS = 256


def _as_output(values: NDArray[np.float64], like: Any) -> Real:
    if np.ndim(like) == 0:
        return float(values)
    return values


def phi(z: ArrayLike) -> Real:
    """Standard normal density."""
    x = np.asarray(z, dtype=float)
    return _as_output(np.exp(-0.5 * x * x) * _INV_SQRT_2PI, z)


def Phi(z: ArrayLike) -> Real:
    """Standard normal distribution function, via erfc."""
    x = np.asarray(z, dtype=float)
    return _as_output(0.5 * special.erfc(-x / _SQRT2), z)


def Q(z: ArrayLike) -> Real:
    """Q(z) = 2φ(z) + z[2Φ(z) - 1]; even in z."""
    x = np.asarray(z, dtype=float)
    return _as_output(2.0 * np.exp(-0.5 * x * x) * _INV_SQRT_2PI + x * special.erf(x / _SQRT2), z)


def Qtilde(z: ArrayLike) -> Real:
    """
    Q̃(z) = 2∫_{|z|}^∞ φ(s)(s - |z|) ds = 2[φ(|z|) - |z| Φ(-|z|)].

    Satisfies Q(z) = |z| + Q̃(z). Rounding can make the closed form a few ulp
    negative for large |z|; the result is clipped at zero.
    """
    a = np.abs(np.asarray(z, dtype=float))
    values = 2.0 * (np.exp(-0.5 * a * a) * _INV_SQRT_2PI - a * 0.5 * special.erfc(a / _SQRT2))
    return _as_output(np.maximum(values, 0.0), z)


def qtilde_upper_bound(z: ArrayLike) -> Real:
    """Sharp bound Q̃(z) ≤ 2φ(z)/(1 + z²), from the Mills-ratio inequality."""
    x = np.asarray(z, dtype=float)
    return _as_output(2.0 * np.exp(-0.5 * x * x) * _INV_SQRT_2PI / (1.0 + x * x), z)


def H(z: ArrayLike) -> Real:
    """
    H(z) = φ(z)/z + Φ(z) - 1 for z > 0.

    Raises:
        DomainError: If any z ≤ 0
    """
    x = np.asarray(z, dtype=float)
    if np.any(~(x > 0.0)):
        raise DomainError("H(z) is defined for z > 0 only", details={"min_z": float(np.min(x))})
    values = np.exp(-0.5 * x * x) * _INV_SQRT_2PI / x - special.ndtr(-x)
    return _as_output(values, z)


class MomentProfile:
    """Continuous moments interpolated from a GPMoments grid.

    m and σ are cubic Hermite interpolants using m' and σ' = μξ; ξ and μ
    are monotone cubic (PCHIP), so |μ| < 1 between nodes whenever it holds
    at the nodes. η is derived from the interpolants as σM'/(ξγ).
    """

    def __init__(self, moments: GPMoments):
        self.moments = moments
        self.grid = moments.grid
        self._m = CubicHermiteSpline(moments.grid, moments.m, moments.m_prime)
        self._m_prime = self._m.derivative()
        self._sigma = CubicHermiteSpline(moments.grid, moments.sigma, moments.sigma_prime)
        self._sigma_prime = self._sigma.derivative()
        self._xi = PchipInterpolator(moments.grid, moments.xi)
        self._mu = PchipInterpolator(moments.grid, moments.mu)

    @property
    def bounds(self) -> Tuple[float, float]:
        """Interval covered by the grid."""
        return float(self.grid[0]), float(self.grid[-1])

    @property
    def length(self) -> float:
        """T, the length of the interval."""
        lo, hi = self.bounds
        return hi - lo

    def m(self, s: ArrayLike) -> Any:
        return self._m(s)

    def m_prime(self, s: ArrayLike) -> Any:
        return self._m_prime(s)

    def sigma(self, s: ArrayLike) -> Any:
        return self._sigma(s)

    def xi(self, s: ArrayLike) -> Any:
        return self._xi(s)

    def gamma(self, s: ArrayLike) -> Any:
        mu = self._mu(s)
        return np.sqrt(1.0 - mu * mu)

    def M(self, s: ArrayLike) -> Any:
        """Normalized mean m/σ."""
        return self._m(s) / self._sigma(s)

    def M_prime(self, s: ArrayLike) -> Any:
        """Exact derivative of the interpolated M."""
        sig = self._sigma(s)
        return self._m_prime(s) / sig - self._m(s) * self._sigma_prime(s) / (sig * sig)

    def eta(self, s: ArrayLike) -> Any:
        return self._sigma(s) * self.M_prime(s) / (self._xi(s) * self.gamma(s))

    def rate(self, s: ArrayLike) -> Any:
        """ξγ/σ, the prefactor of both integrands."""
        return self._xi(s) * self.gamma(s) / self._sigma(s)

    def classic_integrand(self, s: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.rate(s) * phi(self.M(s)) * Q(self.eta(s))

    def residual_integrand(self, s: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.rate(s) * phi(self.M(s)) * Qtilde(self.eta(s))

    def scan_points(self) -> NDArray[np.float64]:
        """The grid with every cell subdivided ``interpolation_refinement`` times."""
        refinement = get_settings().numerics.interpolation_refinement
        positions = np.arange((self.grid.size - 1) * refinement + 1) / refinement
        return np.interp(positions, np.arange(self.grid.size), self.grid)

    def coarse_breakpoints(self) -> NDArray[np.float64]:
        """Grid nodes thinned to at most a few hundred panels."""
        step = max(1, int(np.ceil((self.grid.size - 1) / _MAX_INITIAL_PANELS)))
        return np.union1d(self.grid[::step], self.grid[-1:])


def _as_profile(mom: Union[GPMoments, MomentProfile]) -> MomentProfile:
    return mom if isinstance(mom, MomentProfile) else MomentProfile(mom)


def _bracketed_roots(
    func: Any, s: NDArray[np.float64], signs: NDArray[np.float64], xtol: float
) -> List[float]:
    roots = []
    for i in np.flatnonzero(signs[:-1] * signs[1:] < 0.0):
        roots.append(float(optimize.brentq(lambda x: float(func(x)), s[i], s[i + 1], xtol=xtol)))
    return roots


class Extremum(NamedTuple):
    """Relative extremum of |M| with its multiplicity (1 at an endpoint, else 2)."""

    location: float
    value: float
    multiplicity: int


@dataclass(frozen=True)
class ExtremaProfile:
    """Zeros of M and relative extrema of |M| on the profile interval.

    An endpoint zero of M is listed in ``endpoint_zeros`` and appears in
    ``minima`` with value 0 and multiplicity 1; it is not part of N_z^0.
    """

    zeros: Tuple[float, ...]
    minima: Tuple[Extremum, ...]
    maxima: Tuple[Extremum, ...]
    endpoint_zeros: Tuple[float, ...] = ()
    flags: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def n_z0(self) -> int:
        """Interior zeros of M."""
        return len(self.zeros)

    @property
    def nonzero_minima(self) -> int:
        """L_mn, the number of minima of |M| with a nonzero value."""
        return sum(1 for e in self.minima if e.value > 0.0)

    @property
    def minima_term(self) -> float:
        """Σ ν_j Φ(-m_j)."""
        return float(sum(e.multiplicity * Phi(-e.value) for e in self.minima))

    @property
    def maxima_term(self) -> float:
        """Σ ν̂_j Φ(-M_j)."""
        return float(sum(e.multiplicity * Phi(-e.value) for e in self.maxima))

    def critical_points(self) -> NDArray[np.float64]:
        """Sorted locations of all zeros and extrema."""
        locations = list(self.zeros) + [e.location for e in self.minima + self.maxima]
        return np.unique(np.asarray(locations, dtype=float))


def _endpoint_is_minimum(abs_m: NDArray[np.float64], slope: float, from_left: bool) -> bool:
    if slope != 0.0:
        return slope > 0.0 if from_left else slope < 0.0
    seq = abs_m if from_left else abs_m[::-1]
    moved = np.flatnonzero(seq != seq[0])
    if moved.size == 0:
        # flat profile: left end is a minimum, right end a maximum, so both cancel
        return from_left
    return bool(seq[moved[0]] > seq[0])


def _alternates(zeros: Sequence[float], minima: Sequence[Extremum], maxima: Sequence[Extremum]) -> bool:
    events = [(z, 0) for z in zeros]
    events += [(e.location, 0) for e in minima]
    events += [(e.location, 1) for e in maxima]
    kinds = [kind for _, kind in sorted(events)]
    return all(a != b for a, b in zip(kinds, kinds[1:]))


@with_module_context("crossings")
def find_extrema(mom: Union[GPMoments, MomentProfile]) -> ExtremaProfile:
    """
    Zeros of M and extrema of |M|, endpoints included.

    Sign changes of M and of M' are located on the refined scan grid and
    refined with Brent's method. An interior extremum of |M| is a maximum
    when d|M|/ds goes from positive to negative across it.

    Args:
        mom: Moments or an already built profile

    Returns:
        ExtremaProfile

    Raises:
        DegenerateProfileError: M vanishes on a subinterval
    """
    profile = _as_profile(mom)
    xtol = get_settings().numerics.root_xtol
    s = profile.scan_points()
    m_vals = np.asarray(profile.M(s), dtype=float)
    mp_vals = np.asarray(profile.M_prime(s), dtype=float)
    lo, hi = profile.bounds

    tiny = np.abs(m_vals) <= _ZERO_TOL
    run = np.convolve(tiny.astype(int), np.ones(3, dtype=int), mode="valid")
    if tiny.all() or (run.size and run.max() >= 3):
        first = float(s[np.argmax(tiny)])
        raise DegenerateProfileError(
            f"M vanishes on a subinterval starting near s={first:.6g}; zeros are not isolated",
            details={"grid_point": first},
        )

    signs = np.where(tiny, 0.0, np.sign(m_vals))
    zeros = _bracketed_roots(profile.M, s, signs, xtol)
    zeros += [float(s[i]) for i in np.flatnonzero(tiny[1:-1]) + 1]
    zeros.sort()

    minima: List[Extremum] = []
    maxima: List[Extremum] = []
    endpoint_zeros: List[float] = []
    for idx, edge, from_left in ((0, lo, True), (-1, hi, False)):
        if tiny[idx]:
            endpoint_zeros.append(edge)
            minima.append(Extremum(edge, 0.0, 1))
            continue
        slope = float(np.sign(m_vals[idx]) * mp_vals[idx])
        value = float(abs(m_vals[idx]))
        if _endpoint_is_minimum(np.abs(m_vals), slope, from_left):
            minima.append(Extremum(edge, value, 1))
        else:
            maxima.append(Extremum(edge, value, 1))

    mp_signs = np.sign(mp_vals)
    brackets = [
        (float(optimize.brentq(lambda t: float(profile.M_prime(t)), s[i], s[i + 1], xtol=xtol)), i, i + 1)
        for i in np.flatnonzero(mp_signs[:-1] * mp_signs[1:] < 0.0)
    ]
    # M' exactly zero on a scan node between opposite signs
    on_node = np.flatnonzero((mp_signs[1:-1] == 0.0) & (mp_signs[:-2] * mp_signs[2:] < 0.0)) + 1
    brackets += [(float(s[i]), i - 1, i + 1) for i in on_node]
    for x, left, right in brackets:
        value = float(profile.M(x))
        if abs(value) <= _ZERO_TOL:
            # tangency with the axis, already a zero
            continue
        if np.sign(value) * (mp_vals[right] - mp_vals[left]) < 0.0:
            maxima.append(Extremum(x, abs(value), 2))
        else:
            minima.append(Extremum(x, abs(value), 2))

    minima.sort(key=lambda e: e.location)
    maxima.sort(key=lambda e: e.location)
    flags: List[str] = []
    if endpoint_zeros:
        flags.append("endpoint_zero")
    if not _alternates(zeros, minima, maxima):
        flags.append("extrema_not_alternating")
        logger.warning(
            "Zeros and extrema of |M| do not alternate; the scan grid may be too coarse",
            extra={"extra_fields": {"zeros": len(zeros), "minima": len(minima), "maxima": len(maxima)}},
        )
    return ExtremaProfile(
        zeros=tuple(zeros),
        minima=tuple(minima),
        maxima=tuple(maxima),
        endpoint_zeros=tuple(endpoint_zeros),
        flags=tuple(flags),
    )


def _light_critical_points(profile: MomentProfile) -> List[float]:
    """Sign changes of M and M' without the degeneracy checks of find_extrema."""
    xtol = get_settings().numerics.root_xtol
    s = profile.scan_points()
    m_vals = np.asarray(profile.M(s), dtype=float)
    mp_vals = np.asarray(profile.M_prime(s), dtype=float)
    m_signs = np.where(np.abs(m_vals) <= _ZERO_TOL, 0.0, np.sign(m_vals))
    return _bracketed_roots(profile.M, s, m_signs, xtol) + _bracketed_roots(
        profile.M_prime, s, np.sign(mp_vals), xtol
    )


def _breakpoints(profile: MomentProfile, extra: Sequence[float]) -> NDArray[np.float64]:
    lo, hi = profile.bounds
    inner = [x for x in extra if lo < x < hi]
    return np.union1d(profile.coarse_breakpoints(), np.asarray(inner, dtype=float))


@with_module_context("crossings")
@log_performance(logger, "expected_zeros_classic", threshold_seconds=2.0)
def expected_zeros_classic(
    mom: Union[GPMoments, MomentProfile], tol: Optional[float] = None
) -> QuadratureResult:
    """
    E[N_z] = ∫ (ξγ/σ) φ(m/σ) Q(η) ds by adaptive quadrature.

    Valid for any process meeting the moment invariants, including M ≡ 0.

    Args:
        mom: Moments or a profile built from them
        tol: Absolute quadrature tolerance (defaults to settings)

    Returns:
        QuadratureResult with the value and its error estimate

    Example:
        ```python
        grid = np.linspace(0.0, np.pi, 257)
        rice = GPMoments.from_functions(grid, m=0.0, m_prime=0.0, sigma=1.0, xi=1.0)
        expected_zeros_classic(rice).value  # 1.0
        ```
    """
    profile = _as_profile(mom)
    return adaptive_integrate(
        profile.classic_integrand, _breakpoints(profile, _light_critical_points(profile)), tol=tol
    )


@with_module_context("crossings")
@log_performance(logger, "expected_zeros_alternate", threshold_seconds=2.0)
def expected_zeros_alternate(
    mom: Union[GPMoments, MomentProfile], tol: Optional[float] = None
) -> CrossingReport:
    """
    E[N_z] through zero count, extrema sums and the Q̃ residual integral.

    The classic integral is computed alongside and must agree within twice
    the summed quadrature tolerance.

    Raises:
        DegenerateProfileError: M vanishes on a subinterval (use the classic form)
        ConsistencyError: The two routes disagree
    """
    tol = get_settings().numerics.quadrature_tol if tol is None else tol
    profile = _as_profile(mom)
    extrema = find_extrema(profile)
    breakpoints = _breakpoints(profile, extrema.critical_points().tolist())

    residual = adaptive_integrate(profile.residual_integrand, breakpoints, tol=tol)
    classic = adaptive_integrate(profile.classic_integrand, breakpoints, tol=tol)

    minima_term = extrema.minima_term
    maxima_term = extrema.maxima_term
    expected = extrema.n_z0 + minima_term - maxima_term + residual.value

    report = CrossingReport(
        expected_zeros=expected,
        n_z0=extrema.n_z0,
        endpoint_zeros=len(extrema.endpoint_zeros),
        minima_term=minima_term,
        maxima_term=maxima_term,
        residual_integral=max(residual.value, 0.0),
        classic_integral=max(classic.value, 0.0),
        quadrature_error_estimate=residual.error_estimate + classic.error_estimate,
        flags=list(extrema.flags),
    )

    allowed = 2.0 * (2.0 * tol)
    gap = abs(expected - classic.value)
    if gap > allowed:
        raise ConsistencyError(
            f"alternate form {expected:.10g} and classic integral {classic.value:.10g} differ by {gap:.3e}",
            details={"allowed": allowed, **report.to_record()},
        )

    logger.info(
        "Expected zero count computed",
        extra={
            "extra_fields": {
                "expected_zeros": expected,
                "n_z0": extrema.n_z0,
                "gap": gap,
                "panels": residual.panels + classic.panels,
            }
        },
    )
    return report


@with_module_context("crossings")
def corollary_bound(
    mom: Union[GPMoments, MomentProfile],
    windows: Sequence[Tuple[float, float]],
    c: float,
) -> CorollaryBound:
    """
    Small-noise upper bound on E[N_z] - N_z^0.

    Each window (x_k, w_k) must satisfy, on the scan grid, a constant sign of
    m' and |M(t)| ≥ c|m'(x_k)||t - x_k|/σ(x_k). A decreasing crossing is the
    mirror image of an increasing one, so |m'| is used throughout.

    Args:
        mom: Moments or a profile
        windows: (center, half-width) pairs, disjoint
        c: Slope fraction in (0, 1)

    Returns:
        CorollaryBound with the explicit first term and the order term
        reported separately with constant 1

    Raises:
        PreconditionError: A window fails its hypothesis or windows overlap
    """
    if not 0.0 < c < 1.0:
        raise DomainError(f"c must lie in (0, 1), got {c}")
    profile = _as_profile(mom)
    s = profile.scan_points()
    ordered = sorted((float(x), float(w)) for x, w in windows)
    for (x0, w0), (x1, w1) in zip(ordered, ordered[1:]):
        if x0 + w0 >= x1 - w1:
            raise PreconditionError(
                f"windows around {x0:.6g} and {x1:.6g} overlap",
                details={"windows": [[x0, w0], [x1, w1]]},
            )

    psi: List[float] = []
    first_term = 0.0
    outside = np.ones(s.size, dtype=bool)
    for x, w in ordered:
        if w <= 0.0:
            raise DomainError(f"window half-width must be positive, got {w}")
        inside = np.abs(s - x) <= w
        outside &= ~inside
        pts = np.append(s[inside], x)
        slope = float(profile.m_prime(x))
        if slope == 0.0:
            raise PreconditionError(f"m'(x_k) = 0 at x_k={x:.6g}", details={"x_k": x})
        mp = np.asarray(profile.m_prime(pts), dtype=float)
        wrong_sign = np.flatnonzero(np.sign(mp) != np.sign(slope))
        if wrong_sign.size:
            bad = float(pts[wrong_sign[0]])
            raise PreconditionError(
                f"m' changes sign inside the window around {x:.6g} (at s={bad:.6g})",
                details={"grid_point": bad, "x_k": x},
            )
        sigma_x = float(profile.sigma(x))
        lower = c * abs(slope) * np.abs(pts - x) / sigma_x
        abs_m = np.abs(np.asarray(profile.M(pts), dtype=float))
        violated = np.flatnonzero(abs_m < lower * (1.0 - 1e-12))
        if violated.size:
            bad = float(pts[violated[0]])
            raise PreconditionError(
                f"|M| falls below c·|m'(x_k)|·|t-x_k|/σ(x_k) at s={bad:.6g}",
                details={"grid_point": bad, "x_k": x, "c": c},
            )
        values = (
            np.asarray(Qtilde(profile.eta(pts)), dtype=float)
            * profile.xi(pts)
            * profile.gamma(pts)
            * sigma_x
            / profile.sigma(pts)
        )
        psi_k = float(np.max(values))
        psi.append(psi_k)
        first_term += psi_k / (c * abs(slope))

    sup_ratio = float(np.max(profile.xi(s) / profile.sigma(s)))
    m_o = float(np.min(np.abs(profile.M(s[outside])))) if outside.any() else float("inf")
    l_mn = find_extrema(profile).nonzero_minima
    order_term = (sup_ratio * profile.length + 2.0 * l_mn) * float(phi(m_o)) if np.isfinite(m_o) else 0.0

    return CorollaryBound(
        first_term=first_term,
        order_term=order_term,
        psi=psi,
        sup_xi_over_sigma=sup_ratio,
        m_o=m_o,
        nonzero_minima=l_mn,
    )
