"""Pydantic models for analytic predictions, simulation results and checks."""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class KernelCheck(BaseModel):
    """One exact condition of a kernel."""

    name: str = Field(..., description="Check identifier (moment, first_moment, boundary_jN)")
    detail: str = Field(..., description="The quantity that must vanish")
    value: str = Field(..., description="Exact rational value of that quantity")
    passed: bool = Field(..., description="True when the value is exactly zero")


class KernelValidationReport(BaseModel):
    """Result of checking a kernel against the smoother's conditions."""

    order: int = Field(..., ge=0, description="Derivative order ℓ checked against")
    checks: List[KernelCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        """True when every condition holds exactly."""
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[KernelCheck]:
        """Checks that did not pass."""
        return [c for c in self.checks if not c.passed]


class KoksmaGap(BaseModel):
    """Both sides of the generalized Koksma inequality for one (g, design)."""

    lhs: float = Field(..., ge=0.0, description="|∫ g dF - (1/N) Σ g(t_i) w_i|")
    bound: float = Field(..., ge=0.0, description="(‖g‖_TV + C ‖g‖_∞) D*_N")
    discrepancy: float = Field(..., ge=0.0, description="D*_N of the design")
    integral: float = Field(..., description="∫ g dF")
    discrete_sum: float = Field(..., description="(1/N) Σ g(t_i) w_i")

    @property
    def holds(self) -> bool:
        """True when the inequality is satisfied."""
        return self.lhs <= self.bound


class CrossingReport(BaseModel):
    """Expected zero count with its alternate-form decomposition."""

    expected_zeros: float = Field(..., description="E[N_z] from the alternate form")
    n_z0: int = Field(..., ge=0, description="Interior zeros of M(t)")
    endpoint_zeros: int = Field(0, ge=0, description="Zeros of M at the interval ends")
    minima_term: float = Field(..., ge=0.0, description="Σ ν_j Φ(-m_j)")
    maxima_term: float = Field(..., ge=0.0, description="Σ ν̂_j Φ(-M_j)")
    residual_integral: float = Field(..., ge=0.0, description="∫ (ξγ/σ) φ(M) Q̃(η) ds")
    classic_integral: float = Field(..., ge=0.0, description="Leadbetter-Cryer integral")
    quadrature_error_estimate: float = Field(..., ge=0.0)
    flags: List[str] = Field(default_factory=list, description="Notes on special handling")

    def to_record(self) -> Dict[str, str]:
        """Flat key-value view for the CLI record file."""
        record = {
            key: repr(value) if isinstance(value, float) else str(value)
            for key, value in self.model_dump(exclude={"flags"}).items()
        }
        record["flags"] = ";".join(self.flags)
        return record


class CorollaryBound(BaseModel):
    """Small-noise upper bound on E[N_z] - N_z^0."""

    first_term: float = Field(..., ge=0.0, description="Σ Ψ_k / (c m'(x_k))")
    order_term: float = Field(..., ge=0.0, description="(C T + 2 L_mn) φ(m_o), constant 1")
    psi: List[float] = Field(default_factory=list, description="Ψ_k per window")
    sup_xi_over_sigma: float = Field(..., ge=0.0, description="C = sup ξ/σ")
    m_o: float = Field(..., ge=0.0, description="inf |M| outside the windows")
    nonzero_minima: int = Field(..., ge=0, description="L_mn")
    order_term_flag: bool = Field(
        True, description="The order term is reported with an explicit constant of 1"
    )

    @property
    def total(self) -> float:
        """First term plus the order term."""
        return self.first_term + self.order_term


class SimResult(BaseModel):
    """Monte Carlo mean of a per-replicate count."""

    label: str = Field("crossings", description="What was counted")
    mean_crossings: float = Field(..., description="Sample mean over replicates")
    stderr: float = Field(..., ge=0.0, description="Sample sd / sqrt(replicates)")
    replicates: int = Field(..., gt=0)
    counting_grid_size: int = Field(..., gt=1, description="Nodes of the counting grid")
    seed: int = Field(..., description="Root seed of the replicate substreams")

    def to_row(self) -> Dict[str, str]:
        """CSV row; the seed is recorded in every row."""
        return {
            "label": self.label,
            "mean": repr(self.mean_crossings),
            "stderr": repr(self.stderr),
            "replicates": str(self.replicates),
            "counting_grid_size": str(self.counting_grid_size),
            "seed": str(self.seed),
        }


class ChangePointDiagnostic(BaseModel):
    """Per-change-point quantities entering the change-point formulas."""

    location: float = Field(..., description="x_k")
    next_derivative: float = Field(..., description="f^(ℓ+1)(x_k)")
    sigma_if: float = Field(..., ge=0.0, description="Asymptotic sd of the estimated location")
    z: float = Field(..., gt=0.0, description="Argument of H")
    h_value: float = Field(..., ge=0.0, description="H(z)")


class TailBound(BaseModel):
    """Order-term bound on the probability of a change point outside the windows."""

    value: float = Field(..., ge=0.0, description="Σ_k (σ_if/h) exp(-w²/2σ_if²)")
    per_change_point: List[float] = Field(default_factory=list)
    width: float = Field(..., gt=0.0, description="Uncertainty half-width w")
    warnings: List[str] = Field(default_factory=list, description="Hypothesis violations")
    order_term_flag: bool = Field(True, description="Explicit constant of 1")


class FalseChangePointPrediction(BaseModel):
    """Predicted expected number of spurious change points."""

    excess: float = Field(..., ge=0.0, description="E[K̂] - K")
    diagnostics: List[ChangePointDiagnostic] = Field(default_factory=list)
    admissibility: Dict[str, float] = Field(
        default_factory=dict, description="Rate diagnostics, reported not enforced"
    )
    warnings: List[str] = Field(default_factory=list)
    order_term_flag: bool = Field(True, description="Asymptotic, o_R(1) remainder dropped")


class AcceptanceCheck(BaseModel):
    """One analytic-versus-empirical (or analytic-versus-analytic) comparison."""

    name: str
    analytic: float
    empirical: float
    stderr: Optional[float] = None
    tolerance: float = Field(..., ge=0.0)
    passed: bool
    enforced: bool = Field(True, description="Counts toward the run verdict under --check")
    note: str = ""

    def to_row(self) -> Dict[str, str]:
        """CSV row of the summary table."""
        return {
            "check": self.name,
            "analytic": repr(self.analytic),
            "empirical": repr(self.empirical),
            "stderr": "" if self.stderr is None else repr(self.stderr),
            "tolerance": repr(self.tolerance),
            "passed": "pass" if self.passed else "FAIL",
            "enforced": "yes" if self.enforced else "no",
            "note": self.note,
        }


class RunSummary(BaseModel):
    """Outcome of running one scenario."""

    scenario: str
    halfwidth: float
    noise_sd: float
    checks: List[AcceptanceCheck] = Field(default_factory=list)
    artifacts: List[str] = Field(default_factory=list)

    notes: List[str] = Field(default_factory=list, description="Skipped steps and warnings")

    @property
    def passed(self) -> bool:
        """True when every enforced acceptance check passed."""
        return all(c.passed for c in self.checks if c.enforced)

    @property
    def failures(self) -> List[AcceptanceCheck]:
        """Enforced checks that failed."""
        return [c for c in self.checks if c.enforced and not c.passed]


class SweepRow(BaseModel):
    """One row of a parameter sweep."""

    parameter: str
    value: float
    n: int
    halfwidth: float
    noise_sd: float
    analytic_zeros: Optional[float] = None
    empirical_zeros: Optional[float] = None
    empirical_stderr: Optional[float] = None
    predicted_excess: Optional[float] = None
    empirical_excess: Optional[float] = None
    excess_stderr: Optional[float] = None
    variance_rel_error: float
    mu_sq: float
    max_bias: float
