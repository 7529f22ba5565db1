"""Exact polynomial smoothing kernels on [-1, 1].

Kernels are stored as exact rational coefficients in the monomial basis, so
the moment and boundary conditions the smoother relies on are checked with
exact zeros instead of tolerances. Floating-point evaluation is vectorized
and done on demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from kernelzeros.errors import ConfigurationError, DomainError
from kernelzeros.models.reports import KernelCheck, KernelValidationReport

Scalar = Union[float, NDArray[np.float64]]


def _trim(coeffs: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    trimmed = list(coeffs)
    while len(trimmed) > 1 and trimmed[-1] == 0:
        trimmed.pop()
    return tuple(trimmed) if trimmed else (Fraction(0),)


def _integrate_symmetric(coeffs: Sequence[Fraction]) -> Fraction:
    """∫_{-1}^{1} Σ c_n s^n ds; odd powers vanish."""
    return sum(
        (2 * c / (n + 1) for n, c in enumerate(coeffs) if n % 2 == 0),
        start=Fraction(0),
    )


def _multiply(a: Sequence[Fraction], b: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return _trim(out)


@dataclass(frozen=True)
class PolyKernel:
    """Polynomial kernel κ supported on [-1, 1].

    Attributes:
        coeffs: Exact coefficients of κ(s) = Σ coeffs[n] s^n
        order: Derivative order ℓ the kernel was built for
    """

    coeffs: Tuple[Fraction, ...]
    order: int = 0

    def __post_init__(self) -> None:
        if self.order < 0:
            raise DomainError(f"kernel order must be nonnegative, got {self.order}")
        object.__setattr__(self, "coeffs", _trim([Fraction(c) for c in self.coeffs]))

    @property
    def degree(self) -> int:
        """Polynomial degree (0 for constants, including the zero polynomial)."""
        return len(self.coeffs) - 1

    @cached_property
    def _float_coeffs(self) -> NDArray[np.float64]:
        return np.array([float(c) for c in self.coeffs], dtype=np.float64)

    def __call__(self, s: ArrayLike) -> Scalar:
        return evaluate(self, s)

    def value_at(self, s: Fraction) -> Fraction:
        """Exact value of the polynomial (ignoring the support cut-off)."""
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    def moment(self, j: int) -> Fraction:
        """Exact moment ∫ s^j κ(s) ds."""
        shifted = (Fraction(0),) * j + self.coeffs
        return _integrate_symmetric(shifted)

    def to_dict(self) -> Dict[str, Any]:
        """Serialize as numerator/denominator pairs plus ℓ."""
        return {
            "order": self.order,
            "coeffs": [[c.numerator, c.denominator] for c in self.coeffs],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PolyKernel":
        """Inverse of :meth:`to_dict`.

        Raises:
            ConfigurationError: If the record is malformed
        """
        try:
            pairs: List[List[int]] = data["coeffs"]
            coeffs = tuple(Fraction(int(num), int(den)) for num, den in pairs)
            return cls(coeffs=coeffs, order=int(data.get("order", 0)))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
            raise ConfigurationError(f"Malformed kernel record: {e}") from e


@lru_cache(maxsize=32)
def make_smoothing_kernel(ell: int) -> PolyKernel:
    """
    Normalized kernel c_ℓ (1 - s²)^{ℓ+1}.

    It integrates to one, is symmetric (so ∫ s κ = 0), and its derivatives
    up to order ℓ vanish at ±1.

    Args:
        ell: Derivative order ℓ ≥ 0

    Returns:
        PolyKernel built for order ℓ

    Example:
        >>> make_smoothing_kernel(0).coeffs
        (Fraction(3, 4), Fraction(0, 1), Fraction(-3, 4))
    """
    if ell < 0:
        raise DomainError(f"ℓ must be nonnegative, got {ell}")
    power = ell + 1
    base = [Fraction(0)] * (2 * power + 1)
    for k in range(power + 1):
        base[2 * k] = Fraction((-1) ** k * comb(power, k))
    norm = _integrate_symmetric(base)
    return PolyKernel(coeffs=tuple(c / norm for c in base), order=ell)


def derivative(k: PolyKernel, j: int) -> PolyKernel:
    """
    Exact j-th derivative; the support stays [-1, 1].

    Args:
        k: Kernel to differentiate
        j: Derivative order, 0 ≤ j ≤ degree

    Returns:
        PolyKernel of the derivative (same ``order`` tag)
    """
    if j < 0 or j > k.degree:
        raise DomainError(f"derivative order {j} outside [0, {k.degree}]")
    coeffs = list(k.coeffs)
    for _ in range(j):
        coeffs = [n * c for n, c in enumerate(coeffs)][1:] or [Fraction(0)]
    return PolyKernel(coeffs=tuple(coeffs), order=k.order)


def evaluate(k: PolyKernel, s: ArrayLike) -> Scalar:
    """
    Evaluate κ(s); exactly zero for |s| > 1.

    Accepts scalars or arrays and returns the same shape.
    """
    arr = np.asarray(s, dtype=np.float64)
    # polyval is Horner's scheme
    values = np.polynomial.polynomial.polyval(arr, k._float_coeffs)
    values = np.where(np.abs(arr) <= 1.0, values, 0.0)
    if values.ndim == 0:
        return float(values)
    return values


def l2_norm_sq_exact(k: PolyKernel) -> Fraction:
    """Exact ∫_{-1}^{1} κ(s)² ds."""
    return _integrate_symmetric(_multiply(k.coeffs, k.coeffs))


def l2_norm_sq(k: PolyKernel) -> float:
    """∫_{-1}^{1} κ(s)² ds as a float (computed exactly, then rounded)."""
    return float(l2_norm_sq_exact(k))


def kernel_norm_ratio(k: PolyKernel, ell: int) -> float:
    """‖κ^{(ℓ+1)}‖ / ‖κ^{(ℓ)}‖, the limit of h·ξ_N/σ_N."""
    upper = l2_norm_sq_exact(derivative(k, ell + 1))
    lower = l2_norm_sq_exact(derivative(k, ell))
    return float(np.sqrt(float(upper / lower)))


def validate_kernel(k: PolyKernel, ell: int) -> KernelValidationReport:
    """
    Check the moment and boundary conditions a kernel must satisfy for order ℓ.

    All checks are exact. A violated condition becomes a failed check in the
    report; the function never raises for a bad kernel.

    Args:
        k: Kernel to check
        ell: Derivative order the kernel will be used with

    Returns:
        KernelValidationReport listing every check
    """
    checks: List[KernelCheck] = []

    mass_defect = k.moment(0) - 1
    checks.append(
        KernelCheck(name="moment", detail="∫κ - 1", value=str(mass_defect), passed=mass_defect == 0)
    )

    first = k.moment(1)
    checks.append(KernelCheck(name="first_moment", detail="∫sκ", value=str(first), passed=first == 0))

    for j in range(ell + 1):
        if j > k.degree:
            # derivative is identically zero
            left = right = Fraction(0)
        else:
            dk = derivative(k, j)
            left, right = dk.value_at(Fraction(-1)), dk.value_at(Fraction(1))
        for side, value in (("-1", left), ("+1", right)):
            checks.append(
                KernelCheck(
                    name=f"boundary_j{j}",
                    detail=f"κ^({j})({side})",
                    value=str(value),
                    passed=value == 0,
                )
            )

    return KernelValidationReport(order=ell, checks=checks)
