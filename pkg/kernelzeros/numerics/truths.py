"""Builtin regression functions with closed-form derivatives and change points."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from numpy.typing import ArrayLike, NDArray

from kernelzeros.errors import ConfigurationError, DomainError

# |f^(ℓ+1)| at or below this makes a root of f^(ℓ) degenerate
DEGENERACY_TOL = 1e-8


class Truth(ABC):
    """A regression function f on [0, 1] with analytic derivatives."""

    name: str = "truth"

    @abstractmethod
    def derivative(self, order: int, t: ArrayLike) -> Any:
        """f^(order)(t), vectorized."""

    @abstractmethod
    def candidate_roots(self, order: int, lo: float, hi: float) -> List[float]:
        """Zeros of f^(order) in (lo, hi), before the degeneracy check."""

    @abstractmethod
    def params(self) -> Dict[str, Any]:
        """Parameters the truth was built from."""

    def __call__(self, t: ArrayLike) -> Any:
        return self.derivative(0, t)

    def derivative_fn(self, order: int) -> Callable[[ArrayLike], Any]:
        """f^(order) as a one-argument callable."""
        return lambda t: self.derivative(order, t)

    def change_points(self, ell: int, lo: float = 0.0, hi: float = 1.0) -> Tuple[float, ...]:
        """
        ℓ-change points in (lo, hi): zeros of f^(ℓ) where f^(ℓ+1) ≠ 0.

        Zeros with |f^(ℓ+1)| ≤ 1e-8 are dropped; they are not change points.
        """
        if ell < 0:
            raise DomainError(f"ℓ must be nonnegative, got {ell}")
        roots = sorted(self.candidate_roots(ell, lo, hi))
        kept = [
            x for x in roots if abs(float(self.derivative(ell + 1, x))) > DEGENERACY_TOL
        ]
        deduped: List[float] = []
        for x in kept:
            if not deduped or x - deduped[-1] > 1e-10:
                deduped.append(x)
        return tuple(deduped)

    def describe(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{self.name}({args})"


class PolynomialTruth(Truth):
    """f(t) = Σ c_n (t - center)^n."""

    name = "polynomial"

    def __init__(self, coeffs: Sequence[float], center: float = 0.0):
        if len(coeffs) == 0:
            raise ConfigurationError("polynomial truth needs at least one coefficient")
        self.coeffs = [float(c) for c in coeffs]
        self.center = float(center)
        self._poly = Polynomial(self.coeffs)

    def _poly_of_order(self, order: int) -> Polynomial:
        if order < 0:
            raise DomainError(f"derivative order must be nonnegative, got {order}")
        return self._poly.deriv(order) if order else self._poly

    def derivative(self, order: int, t: ArrayLike) -> Any:
        x = np.asarray(t, dtype=float) - self.center
        values = self._poly_of_order(order)(x)
        return float(values) if np.ndim(values) == 0 else values

    def candidate_roots(self, order: int, lo: float, hi: float) -> List[float]:
        poly = self._poly_of_order(order)
        if np.all(poly.coef == 0.0) or poly.degree() < 1:
            return []
        roots = poly.roots()
        real = roots[np.abs(roots.imag) <= 1e-10].real + self.center
        return [float(x) for x in real if lo < x < hi]

    def params(self) -> Dict[str, Any]:
        return {"coeffs": self.coeffs, "center": self.center}


class SineTruth(Truth):
    """f(t) = A sin(2π m t + φ)."""

    name = "sine"

    def __init__(self, amplitude: float = 1.0, frequency: float = 1.0, phase: float = 0.0):
        if frequency <= 0.0:
            raise ConfigurationError(f"sine frequency must be positive, got {frequency}")
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)
        self.phase = float(phase)

    def derivative(self, order: int, t: ArrayLike) -> Any:
        if order < 0:
            raise DomainError(f"derivative order must be nonnegative, got {order}")
        omega = 2.0 * np.pi * self.frequency
        x = np.asarray(t, dtype=float)
        values = self.amplitude * omega**order * np.sin(omega * x + self.phase + order * np.pi / 2.0)
        return float(values) if np.ndim(values) == 0 else values

    def candidate_roots(self, order: int, lo: float, hi: float) -> List[float]:
        if self.amplitude == 0.0:
            return []
        omega = 2.0 * np.pi * self.frequency
        shift = self.phase + order * np.pi / 2.0
        j_lo = int(np.floor((omega * lo + shift) / np.pi))
        j_hi = int(np.ceil((omega * hi + shift) / np.pi))
        candidates = ((j * np.pi - shift) / omega for j in range(j_lo, j_hi + 1))
        return [float(x) for x in candidates if lo < x < hi]

    def params(self) -> Dict[str, Any]:
        return {"amplitude": self.amplitude, "frequency": self.frequency, "phase": self.phase}


class LogisticBumpTruth(Truth):
    """f(t) = 4A s(1 - s) with s the logistic function of (t - center)/width.

    Derivatives are polynomials in s: d/dt P(s) = P'(s) s(1 - s) / width.
    """

    name = "logistic-bump"

    def __init__(self, amplitude: float = 1.0, center: float = 0.5, width: float = 0.1):
        if width <= 0.0:
            raise ConfigurationError(f"logistic-bump width must be positive, got {width}")
        self.amplitude = float(amplitude)
        self.center = float(center)
        self.width = float(width)
        self._polys: List[Polynomial] = [Polynomial([0.0, 4.0 * self.amplitude, -4.0 * self.amplitude])]

    def _poly_of_order(self, order: int) -> Polynomial:
        if order < 0:
            raise DomainError(f"derivative order must be nonnegative, got {order}")
        slope = Polynomial([0.0, 1.0, -1.0]) / self.width
        while len(self._polys) <= order:
            self._polys.append(self._polys[-1].deriv() * slope)
        return self._polys[order]

    def _logistic(self, t: ArrayLike) -> NDArray[np.float64]:
        u = (np.asarray(t, dtype=float) - self.center) / self.width
        return 0.5 * (1.0 + np.tanh(0.5 * u))

    def derivative(self, order: int, t: ArrayLike) -> Any:
        values = self._poly_of_order(order)(self._logistic(t))
        return float(values) if np.ndim(values) == 0 else values

    def candidate_roots(self, order: int, lo: float, hi: float) -> List[float]:
        poly = self._poly_of_order(order)
        if self.amplitude == 0.0 or poly.degree() < 1:
            return []
        roots = poly.roots()
        real = roots[np.abs(roots.imag) <= 1e-10].real
        inside = real[(real > 0.0) & (real < 1.0)]
        t = self.center + self.width * np.log(inside / (1.0 - inside))
        return [float(x) for x in t if lo < x < hi]

    def params(self) -> Dict[str, Any]:
        return {"amplitude": self.amplitude, "center": self.center, "width": self.width}


_BUILTIN_TRUTHS: Dict[str, Callable[..., Truth]] = {
    PolynomialTruth.name: PolynomialTruth,
    SineTruth.name: SineTruth,
    LogisticBumpTruth.name: LogisticBumpTruth,
}


def available_truths() -> List[str]:
    """Identifiers of the builtin truths."""
    return sorted(_BUILTIN_TRUTHS)


def build_truth(name: str, **params: Any) -> Truth:
    """
    Build a builtin truth by identifier.

    Raises:
        ConfigurationError: Unknown identifier or bad parameters

    Example:
        ```python
        cubic = build_truth("polynomial", coeffs=[0, 0, 0, 1], center=0.5)
        cubic.change_points(2)  # (0.5,)
        ```
    """
    try:
        factory = _BUILTIN_TRUTHS[name]
    except KeyError:
        raise ConfigurationError(
            f"Unknown truth '{name}'. Available: {', '.join(available_truths())}"
        ) from None
    try:
        return factory(**params)
    except TypeError as e:
        raise ConfigurationError(f"Bad parameters for truth '{name}': {e}") from e
