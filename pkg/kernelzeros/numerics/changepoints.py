"""Change-point asymptotics for the derivative estimate.

An ℓ-change point x_k is a zero of f^(ℓ) with f^(ℓ+1)(x_k) ≠ 0. The
estimate f̂^(ℓ) places a zero within O(σ_if) of each x_k, spurious zeros
far from every x_k are exponentially rare, and near-coincident extra pairs
add 2 H(z_k) to the expected count per change point.

Every asymptotic expression is returned with an explicit constant of 1 and
an ``order_term_flag`` so callers never mistake it for a sharp value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from kernelzeros.errors import DegenerateChangePointError, DomainError, PreconditionError
from kernelzeros.models.reports import ChangePointDiagnostic, FalseChangePointPrediction, TailBound
from kernelzeros.numerics.crossings import H
from kernelzeros.numerics.design import Design, LimitDistribution, star_discrepancy
from kernelzeros.numerics.kernels import derivative, l2_norm_sq
from kernelzeros.numerics.smoother import SmootherSpec, asymptotic_moments, exact_sigma_at
from kernelzeros.numerics.truths import DEGENERACY_TOL, Truth
from kernelzeros.utils.decorators import with_module_context
from kernelzeros.utils.logger import setup_logger

logger = setup_logger(__name__)

PILOT_HALFWIDTH_CAP = 0.49


@dataclass(frozen=True)
class ChangePointProblem:
    """Truth, its ℓ-change points, and the estimator looking for them.

    Attributes:
        truth: f with analytic derivatives
        change_points: x_k, zeros of f^(ℓ) inside [h, 1 - h]
        spec: Estimator (ℓ, h, kernel, σ)
        dist: Limiting design distribution F
        n: Number of measurements N
    """

    truth: Truth
    change_points: Tuple[float, ...]
    spec: SmootherSpec
    dist: LimitDistribution
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"n must be positive, got {self.n}")
        object.__setattr__(self, "change_points", tuple(sorted(float(x) for x in self.change_points)))
        ell = self.spec.ell
        for x in self.change_points:
            slope = float(self.truth.derivative(ell + 1, x))
            if abs(slope) <= DEGENERACY_TOL:
                raise DegenerateChangePointError(
                    f"f^({ell + 1}) vanishes at the change point x={x:.6g}",
                    module="changepoints",
                    details={"x_k": x, "next_derivative": slope},
                )
        lo, hi = self.spec.interior
        for edge in (lo, hi):
            if abs(float(self.truth.derivative(ell, edge))) <= DEGENERACY_TOL:
                raise PreconditionError(
                    f"f^({ell}) vanishes at the edge {edge:.6g} of the estimation region",
                    module="changepoints",
                    details={"edge": edge},
                )

    @classmethod
    def from_truth(
        cls, truth: Truth, spec: SmootherSpec, dist: LimitDistribution, n: int
    ) -> "ChangePointProblem":
        """Locate the change points of a truth inside the estimation region."""
        lo, hi = spec.interior
        return cls(
            truth=truth,
            change_points=truth.change_points(spec.ell, lo, hi),
            spec=spec,
            dist=dist,
            n=n,
        )

    @property
    def k(self) -> int:
        """Number of change points K."""
        return len(self.change_points)

    def next_derivative(self, k: int) -> float:
        """f^(ℓ+1)(x_k)."""
        return float(self.truth.derivative(self.spec.ell + 1, self._location(k)))

    def _location(self, k: int) -> float:
        if not 0 <= k < len(self.change_points):
            raise DomainError(f"change point index {k} outside [0, {len(self.change_points)})")
        return self.change_points[k]


@with_module_context("changepoints")
def sigma_if(p: ChangePointProblem, k: int, design: Optional[Design] = None) -> float:
    """
    Standard deviation of the estimated location of change point k.

    σ_if² = σ²‖κ^(ℓ)‖² / (|f^(ℓ+1)(x_k)|² N F'(x_k) h^{2ℓ+1}). With a
    design, the finite-sample sd of the estimate at x_k replaces the
    asymptotic one.

    Args:
        p: Problem
        k: Change point index
        design: Optional design for the exact variant

    Returns:
        σ_if(x_k)
    """
    x = p._location(k)
    slope = abs(p.next_derivative(k))
    if design is not None:
        return exact_sigma_at(p.spec, design, x) / slope
    sigma_asym, _ = asymptotic_moments(p.spec, p.dist, p.n, x)
    return float(sigma_asym) / slope


def signal_level(p: ChangePointProblem, k: int) -> float:
    """
    The argument z_k of H.

    z_k² = |f^(ℓ+1)(x_k)|² N F'(x_k) h^{2ℓ+3} / (σ²‖κ^(ℓ+1)‖²),
    the slope of f^(ℓ) at x_k in units of the asymptotic sd of Z'.
    """
    x = p._location(k)
    _, xi_asym = asymptotic_moments(p.spec, p.dist, p.n, x)
    return abs(p.next_derivative(k)) / float(xi_asym)


def noise_for_signal_level(
    truth: Truth,
    change_point: float,
    spec: SmootherSpec,
    dist: LimitDistribution,
    n: int,
    target_z: float,
) -> float:
    """
    Noise sd that puts the H-argument of one change point at ``target_z``.

    The noise level of ``spec`` is ignored.
    """
    if target_z <= 0.0:
        raise DomainError(f"target z must be positive, got {target_z}")
    slope = abs(float(truth.derivative(spec.ell + 1, change_point)))
    if slope <= DEGENERACY_TOL:
        raise DegenerateChangePointError(
            f"f^({spec.ell + 1}) vanishes at x={change_point:.6g}", module="changepoints"
        )
    norm = np.sqrt(l2_norm_sq(derivative(spec.kernel, spec.ell + 1)))
    density = float(dist.density(change_point))
    return float(slope * np.sqrt(n * density * spec.h ** (2 * spec.ell + 3)) / (target_z * norm))


def diagnostics(p: ChangePointProblem, design: Optional[Design] = None) -> List[ChangePointDiagnostic]:
    """Per-change-point record (x_k, f^(ℓ+1)(x_k), σ_if, z_k, H(z_k))."""
    rows = []
    for k, x in enumerate(p.change_points):
        z = signal_level(p, k)
        rows.append(
            ChangePointDiagnostic(
                location=x,
                next_derivative=p.next_derivative(k),
                sigma_if=sigma_if(p, k, design),
                z=z,
                h_value=float(H(z)),
            )
        )
    return rows


def admissibility_diagnostics(p: ChangePointProblem, design: Optional[Design] = None) -> Dict[str, float]:
    """
    Rate quantities the asymptotics rely on; reported, never enforced.

    ``h_rate`` = h N^{1/(2ℓ+3)} should stay bounded away from zero,
    ``first_moment`` = ∫sκ must be zero, and with a design
    ``discrepancy_ratio`` = D*_N √(N h) should be small.
    """
    ell, h = p.spec.ell, p.spec.h
    report = {
        "h_rate": h * p.n ** (1.0 / (2 * ell + 3)),
        "first_moment": float(p.spec.kernel.moment(1)),
    }
    if design is not None:
        report["discrepancy_ratio"] = star_discrepancy(design) * np.sqrt(design.n * h)
    return report


@with_module_context("changepoints")
def expected_false_changepoints(
    p: ChangePointProblem, design: Optional[Design] = None
) -> FalseChangePointPrediction:
    """
    Predicted E[K̂] - K = 2 Σ_k H(z_k).

    Raises:
        PreconditionError: The kernel's first moment is nonzero

    Example:
        ```python
        prediction = expected_false_changepoints(problem)
        prediction.excess, [d.z for d in prediction.diagnostics]
        ```
    """
    if p.spec.kernel.moment(1) != 0:
        raise PreconditionError(
            "the false change-point count needs a kernel with ∫sκ = 0",
            details={"first_moment": str(p.spec.kernel.moment(1))},
        )
    rows = diagnostics(p, design)
    warnings: List[str] = []
    if not rows:
        warnings.append("no change points in the estimation region; excess is 0")
    excess = 2.0 * sum(r.h_value for r in rows)
    logger.info(
        "Predicted false change points",
        extra={"extra_fields": {"excess": excess, "z": [r.z for r in rows]}},
    )
    return FalseChangePointPrediction(
        excess=excess,
        diagnostics=rows,
        admissibility=admissibility_diagnostics(p, design),
        warnings=warnings,
    )


@with_module_context("changepoints")
def tail_bound(p: ChangePointProblem, w: float) -> TailBound:
    """
    Order-term bound on a zero of f̂^(ℓ) outside every window x_k ± w.

    Σ_k (σ_if(x_k)/h) exp(-w²/2σ_if²(x_k)) with constant 1. Violated rate
    hypotheses (h/w not small, w² N h^{2ℓ+1} < 1) become warnings.
    """
    if w <= 0.0:
        raise DomainError(f"window half-width must be positive, got {w}")
    ell, h = p.spec.ell, p.spec.h
    warnings: List[str] = []
    if h / w > 0.5:
        warnings.append(f"h/w = {h / w:.3g} > 0.5; the bound assumes h/w → 0")
    if w * w * p.n * h ** (2 * ell + 1) < 1.0 - 1e-9:
        warnings.append(f"w² N h^(2ℓ+1) = {w * w * p.n * h ** (2 * ell + 1):.3g} < 1")
    per_k: List[float] = []
    for k in range(p.k):
        s = sigma_if(p, k)
        per_k.append((s / h) * float(np.exp(-(w * w) / (2.0 * s * s))))
    for message in warnings:
        logger.warning(message, extra={"extra_fields": {"w": w, "h": h}})
    return TailBound(value=float(sum(per_k)), per_change_point=per_k, width=w, warnings=warnings)


def default_tail_window(p: ChangePointProblem, design: Optional[Design] = None) -> float:
    """
    Smallest half-width w meeting the rate hypotheses of :func:`tail_bound`.

    w = max(4 max_k σ_if(x_k), 2h, 1/√(N h^{2ℓ+1})), so h/w ≤ 1/2 and
    w² N h^{2ℓ+1} ≥ 1 hold by construction.
    """
    ell, h = p.spec.ell, p.spec.h
    spread = max((sigma_if(p, k, design) for k in range(p.k)), default=0.0)
    return float(max(4.0 * spread, 2.0 * h, 1.0 / np.sqrt(p.n * h ** (2 * ell + 1))))


def pilot_halfwidth(ell: int, n: int, safety: float = 1.0) -> float:
    """
    Advisory pilot halfwidth safety · ln(n) · n^{-1/(2ℓ+3)}.

    Values at or above 1/2 are clamped to 0.49 with a warning.

    Args:
        ell: Derivative order
        n: Number of measurements, at least 2
        safety: Multiplier ≥ 1

    Returns:
        Halfwidth in (0, 1/2)
    """
    if n < 2:
        raise DomainError(f"pilot halfwidth needs n ≥ 2, got {n}")
    if safety < 1.0:
        raise DomainError(f"safety factor must be at least 1, got {safety}")
    if ell < 0:
        raise DomainError(f"ℓ must be nonnegative, got {ell}")
    raw = safety * np.log(n) * n ** (-1.0 / (2 * ell + 3))
    if raw >= 0.5:
        logger.warning(
            f"Pilot halfwidth {raw:.4g} clamped to {PILOT_HALFWIDTH_CAP}",
            extra={"extra_fields": {"ell": ell, "n": n, "safety": safety, "raw": raw}},
        )
        return PILOT_HALFWIDTH_CAP
    return float(raw)
