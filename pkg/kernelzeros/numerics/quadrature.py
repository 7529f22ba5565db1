"""Adaptive composite Gauss-Legendre quadrature.

Each panel is integrated once whole and once as two halves; the difference is
the panel's error estimate and the halves are kept as its value. Panels whose
error exceeds their share of the tolerance are bisected, and the halves
already computed become the children's whole-panel values, so every round
costs two rule applications per refined panel.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from kernelzeros.config import get_settings
from kernelzeros.errors import DomainError, QuadratureError
from kernelzeros.utils.logger import setup_logger

logger = setup_logger(__name__)

Integrand = Callable[[NDArray[np.float64]], Any]

_MAX_ROUNDS = 64


@dataclass(frozen=True)
class QuadratureResult:
    """Value of an integral with its estimated absolute error."""

    value: float
    error_estimate: float
    panels: int


@lru_cache(maxsize=16)
def gauss_legendre_rule(points: int) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Nodes and weights of the n-point rule on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(points)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def _apply_rule(
    func: Integrand,
    lo: NDArray[np.float64],
    hi: NDArray[np.float64],
    nodes: NDArray[np.float64],
    weights: NDArray[np.float64],
) -> NDArray[np.float64]:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    fx = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        bad = float(x.ravel()[np.flatnonzero(~np.isfinite(fx.ravel()))[0]])
        raise QuadratureError(f"integrand is not finite at s={bad:.6g}", details={"point": bad})
    return half * (fx @ weights)


def adaptive_integrate(
    func: Integrand,
    breakpoints: Sequence[float],
    *,
    tol: Optional[float] = None,
    points: Optional[int] = None,
    max_panels: Optional[int] = None,
) -> QuadratureResult:
    """
    Integrate a vectorized function over [breakpoints[0], breakpoints[-1]].

    Args:
        func: Integrand accepting a 1-d array of abscissae
        breakpoints: Sorted initial panel boundaries (at least two)
        tol: Absolute tolerance on the summed error estimate
        points: Gauss-Legendre nodes per panel
        max_panels: Give up beyond this many panels

    Returns:
        QuadratureResult

    Raises:
        QuadratureError: Tolerance not reached within max_panels

    Example:
        ```python
        result = adaptive_integrate(np.sin, [0.0, np.pi], tol=1e-10)
        assert abs(result.value - 2.0) < 1e-10
        ```
    """
    numerics = get_settings().numerics
    tol = numerics.quadrature_tol if tol is None else tol
    points = numerics.panel_points if points is None else points
    max_panels = numerics.max_panels if max_panels is None else max_panels
    if tol <= 0.0:
        raise DomainError(f"quadrature tolerance must be positive, got {tol}")

    edges = np.unique(np.asarray(breakpoints, dtype=float))
    if edges.size < 2:
        raise DomainError("quadrature needs an interval of positive length")
    nodes, weights = gauss_legendre_rule(points)
    length = float(edges[-1] - edges[0])

    lo, hi = edges[:-1], edges[1:]
    whole = _apply_rule(func, lo, hi, nodes, weights)

    done_value = 0.0
    done_error = 0.0
    done_panels = 0
    for _ in range(_MAX_ROUNDS):
        mid = 0.5 * (lo + hi)
        halves = _apply_rule(func, np.concatenate([lo, mid]), np.concatenate([mid, hi]), nodes, weights)
        left, right = halves[: lo.size], halves[lo.size :]
        err = np.abs(whole - (left + right))

        total_error = done_error + float(err.sum())
        if total_error <= tol:
            return QuadratureResult(
                value=done_value + float((left + right).sum()),
                error_estimate=total_error,
                panels=done_panels + int(lo.size),
            )

        split = err > tol * (hi - lo) / length
        keep = ~split
        done_value += float((left[keep] + right[keep]).sum())
        done_error += float(err[keep].sum())
        done_panels += int(keep.sum())

        n_active = 2 * int(split.sum())
        if done_panels + n_active > max_panels:
            raise QuadratureError(
                f"quadrature did not reach tol={tol:g} within {max_panels} panels",
                details={
                    "error_estimate": total_error,
                    "worst_panel": [float(lo[np.argmax(err)]), float(hi[np.argmax(err)])],
                },
            )

        lo, mid_s, hi = lo[split], mid[split], hi[split]
        whole = np.concatenate([left[split], right[split]])
        lo, hi = np.concatenate([lo, mid_s]), np.concatenate([mid_s, hi])

    raise QuadratureError(
        f"quadrature did not reach tol={tol:g} after {_MAX_ROUNDS} bisection rounds",
        details={"active_panels": int(lo.size)},
    )
