"""Scenario pipeline: analytic predictions, their Monte Carlo counterparts, and artifacts.

The pipeline mirrors a batch run end to end:
1. Build truth, limiting distribution, halfwidth, design and estimator
2. Compute the exact process moments over the counting interval
3. Expected zero count by the classic integral and the alternate form
4. Monte Carlo zero counts
5. Change-point predictions (excess count, tail bound, corollary bound)
6. Acceptance checks comparing each prediction with its counterpart

Computation and file output are separate so tests can inspect a
:class:`ScenarioResult` without touching the filesystem.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from kernelzeros.config import get_settings
from kernelzeros.errors import ConfigurationError, DegenerateProfileError, PreconditionError
from kernelzeros.models.reports import (
    AcceptanceCheck,
    CorollaryBound,
    CrossingReport,
    FalseChangePointPrediction,
    RunSummary,
    SimResult,
    TailBound,
)
from kernelzeros.models.scenario import Scenario
from kernelzeros.numerics.changepoints import (
    ChangePointProblem,
    default_tail_window,
    expected_false_changepoints,
    noise_for_signal_level,
    tail_bound,
)
from kernelzeros.numerics.crossings import (
    MomentProfile,
    corollary_bound,
    expected_zeros_alternate,
    expected_zeros_classic,
    find_extrema,
)
from kernelzeros.numerics.design import (
    Design,
    LimitDistribution,
    build_distribution,
    random_design,
    regular_design,
)
from kernelzeros.numerics.montecarlo import (
    simulate_changepoint_excess,
    simulate_crossings,
    simulate_spurious_frequency,
)
from kernelzeros.numerics.quadrature import QuadratureResult
from kernelzeros.numerics.smoother import GPMoments, SmootherSpec, gp_moments, moment_grid
from kernelzeros.numerics.truths import Truth, build_truth
from kernelzeros.utils.helpers import csv_text, format_float, summary_rows, timestamp_header, write_csv, write_record
from kernelzeros.utils.logger import setup_logger

logger = setup_logger(__name__)

SUMMARY_COLUMNS = ("check", "analytic", "empirical", "stderr", "tolerance", "passed", "enforced", "note")
SIMULATION_COLUMNS = ("label", "mean", "stderr", "replicates", "counting_grid_size", "seed")
CHANGEPOINT_COLUMNS = ("location", "next_derivative", "sigma_if", "z", "h_value", "tail_term")


# ============================================================================
# Setup
# ============================================================================

@dataclass(frozen=True)
class ScenarioContext:
    """Everything a scenario resolves to before any prediction is computed."""

    scenario: Scenario
    truth: Truth
    dist: LimitDistribution
    design: Design
    spec: SmootherSpec
    interval: Tuple[float, float]

    @property
    def covers_interior(self) -> bool:
        """True when the counting interval is the whole estimation region."""
        lo, hi = self.spec.interior
        return abs(self.interval[0] - lo) < 1e-12 and abs(self.interval[1] - hi) < 1e-12


def build_context(scenario: Scenario) -> ScenarioContext:
    """
    Resolve a scenario into numeric objects.

    The noise level comes from ``noise_sd`` or, with ``target_z``, from the
    first change point of the truth inside [h, 1 - h].

    Raises:
        ConfigurationError: Unbuildable truth or distribution, a target
            signal level without a change point, or a counting interval
            outside the estimation region
    """
    truth = build_truth(scenario.truth.name, **scenario.truth.params)
    dist = build_distribution(scenario.distribution.name, **scenario.distribution.params)
    h = scenario.resolve_halfwidth()
    if scenario.design.kind == "random":
        design = random_design(scenario.n, dist, seed=int(scenario.design.seed or 0))
    else:
        design = regular_design(scenario.n, dist)

    spec = SmootherSpec.canonical(scenario.ell, h, 1.0)
    if scenario.target_z is not None:
        lo, hi = spec.interior
        candidates = truth.change_points(scenario.ell, lo, hi)
        if not candidates:
            raise ConfigurationError(
                f"target_z needs an ℓ-change point of {truth.describe()} inside [{lo:.4g}, {hi:.4g}]",
                source=scenario.name,
            )
        noise = noise_for_signal_level(truth, candidates[0], spec, dist, scenario.n, scenario.target_z)
    else:
        noise = float(scenario.noise_sd or 0.0)
    spec = spec.with_noise(noise)

    interval = spec.interior
    if scenario.simulation.counting_interval is not None:
        lo, hi = (float(x) for x in scenario.simulation.counting_interval)
        if not (spec.h <= lo < hi <= 1.0 - spec.h):
            raise ConfigurationError(
                f"counting interval [{lo}, {hi}] must lie inside [{spec.h:.4g}, {1.0 - spec.h:.4g}]",
                source=scenario.name,
            )
        interval = (lo, hi)

    logger.info(
        f"Resolved scenario {scenario.name}",
        extra={
            "extra_fields": {
                "truth": truth.describe(),
                "ell": spec.ell,
                "n": design.n,
                "h": spec.h,
                "noise_sd": spec.noise_sd,
                "interval": list(interval),
            }
        },
    )
    return ScenarioContext(scenario=scenario, truth=truth, dist=dist, design=design, spec=spec, interval=interval)


def counting_moments(ctx: ScenarioContext) -> GPMoments:
    """Exact moments on a grid over the counting interval."""
    size = moment_grid(ctx.spec).size
    grid = np.linspace(ctx.interval[0], ctx.interval[1], size)
    return gp_moments(ctx.spec, ctx.design, ctx.truth, grid)


# ============================================================================
# Results
# ============================================================================

@dataclass
class ChangePointResults:
    """Change-point predictions and their simulated counterparts."""

    problem: ChangePointProblem
    prediction: FalseChangePointPrediction
    tail: Optional[TailBound] = None
    excess_sim: Optional[SimResult] = None
    spurious_sim: Optional[SimResult] = None


@dataclass
class ScenarioResult:
    """Outcome of :func:`execute_scenario` before anything is written."""

    context: ScenarioContext
    moments: GPMoments
    classic: QuadratureResult
    crossing: Optional[CrossingReport]
    simulations: List[SimResult] = field(default_factory=list)
    changepoints: Optional[ChangePointResults] = None
    corollary: Optional[CorollaryBound] = None
    checks: List[AcceptanceCheck] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def analytic_zeros(self) -> float:
        """Alternate-form value when available, the classic integral otherwise."""
        return self.crossing.expected_zeros if self.crossing is not None else self.classic.value

    def summary(self, artifacts: Optional[List[str]] = None) -> RunSummary:
        return RunSummary(
            scenario=self.context.scenario.name,
            halfwidth=self.context.spec.h,
            noise_sd=self.context.spec.noise_sd,
            checks=self.checks,
            artifacts=artifacts or [],
            notes=self.notes,
        )


# ============================================================================
# Pipeline Steps
# ============================================================================

def _crossing_predictions(
    moments: GPMoments, tol: float, notes: List[str]
) -> Tuple[QuadratureResult, Optional[CrossingReport]]:
    profile = MomentProfile(moments)
    classic = expected_zeros_classic(profile, tol=tol)
    try:
        crossing = expected_zeros_alternate(profile, tol=tol)
    except DegenerateProfileError as e:
        notes.append(f"alternate form skipped: {e}")
        logger.warning("Alternate form skipped; M vanishes on a subinterval")
        crossing = None
    return classic, crossing


def _corollary_windows(profile: MomentProfile, window: Optional[float]) -> List[Tuple[float, float]]:
    """One window per interior zero of M, shrunk to stay disjoint."""
    zeros = list(find_extrema(profile).zeros)
    windows = []
    for i, x in enumerate(zeros):
        if window is not None:
            w = window
        else:
            w = 4.0 * float(profile.sigma(x)) / max(abs(float(profile.m_prime(x))), 1e-300)
        gaps = [abs(x - z) for j, z in enumerate(zeros) if j != i]
        if gaps:
            w = min(w, 0.45 * min(gaps))
        windows.append((float(x), w))
    return windows


def _changepoint_predictions(
    ctx: ScenarioContext, crossing_sim: Optional[SimResult], notes: List[str]
) -> Optional[ChangePointResults]:
    cfg = ctx.scenario.changepoints
    try:
        if cfg.locations is not None:
            problem = ChangePointProblem(
                truth=ctx.truth,
                change_points=tuple(cfg.locations),
                spec=ctx.spec,
                dist=ctx.dist,
                n=ctx.scenario.n,
            )
        else:
            problem = ChangePointProblem.from_truth(ctx.truth, ctx.spec, ctx.dist, ctx.scenario.n)
        prediction = expected_false_changepoints(problem, ctx.design)
    except PreconditionError as e:
        notes.append(f"change-point predictions skipped: {e}")
        return None
    notes.extend(prediction.warnings)
    results = ChangePointResults(problem=problem, prediction=prediction)

    if problem.k:
        w = cfg.window if cfg.window is not None else default_tail_window(problem, ctx.design)
        results.tail = tail_bound(problem, w)
        notes.extend(results.tail.warnings)
    else:
        notes.append("no change points; tail bound not evaluated")

    sim = ctx.scenario.simulation
    if sim.reps == 0:
        return results
    if crossing_sim is not None and ctx.covers_interior:
        results.excess_sim = crossing_sim.model_copy(
            update={"label": "changepoint_excess", "mean_crossings": crossing_sim.mean_crossings - problem.k}
        )
    else:
        results.excess_sim = simulate_changepoint_excess(
            ctx.spec, ctx.design, ctx.truth, problem.change_points,
            reps=sim.reps, seed=sim.seed, grid_size=sim.grid_size,
        )
    if results.tail is not None:
        results.spurious_sim = simulate_spurious_frequency(
            ctx.spec, ctx.design, ctx.truth, problem.change_points, results.tail.width,
            reps=sim.reps, seed=sim.seed, grid_size=sim.grid_size,
        )
    return results


def _corollary(ctx: ScenarioContext, moments: GPMoments, notes: List[str]) -> Optional[CorollaryBound]:
    profile = MomentProfile(moments)
    cfg = ctx.scenario.changepoints
    try:
        return corollary_bound(profile, _corollary_windows(profile, cfg.window), cfg.corollary_c)
    except PreconditionError as e:
        notes.append(f"corollary bound skipped: {e}")
        return None


def _monte_carlo_tolerance(k: float, sim: SimResult) -> float:
    """k standard errors plus one count in ``replicates``."""
    return k * sim.stderr + 1.0 / sim.replicates


def _acceptance_checks(result: ScenarioResult, tol: float) -> List[AcceptanceCheck]:
    cfg = result.context.scenario.acceptance
    k = cfg.sigma_multiple
    checks: List[AcceptanceCheck] = []

    if result.crossing is not None:
        gap = abs(result.crossing.expected_zeros - result.classic.value)
        checks.append(
            AcceptanceCheck(
                name="classic_vs_alternate",
                analytic=result.crossing.expected_zeros,
                empirical=result.classic.value,
                tolerance=4.0 * tol,
                passed=gap <= 4.0 * tol,
                note="both analytic; tolerance is twice the summed quadrature tolerance",
            )
        )

    sims = {s.label: s for s in result.simulations}
    crossing_sim = sims.get("crossings")
    if crossing_sim is not None:
        tolerance = _monte_carlo_tolerance(k, crossing_sim) + result.classic.error_estimate
        checks.append(
            AcceptanceCheck(
                name="expected_zeros",
                analytic=result.analytic_zeros,
                empirical=crossing_sim.mean_crossings,
                stderr=crossing_sim.stderr,
                tolerance=tolerance,
                passed=abs(result.analytic_zeros - crossing_sim.mean_crossings) <= tolerance,
                enforced=cfg.crossings,
                note=f"|analytic - empirical| <= {k:g} stderr + 1/reps",
            )
        )

    cp = result.changepoints
    if cp is not None and cp.excess_sim is not None:
        tolerance = _monte_carlo_tolerance(k, cp.excess_sim)
        checks.append(
            AcceptanceCheck(
                name="changepoint_excess",
                analytic=cp.prediction.excess,
                empirical=cp.excess_sim.mean_crossings,
                stderr=cp.excess_sim.stderr,
                tolerance=tolerance,
                passed=abs(cp.prediction.excess - cp.excess_sim.mean_crossings) <= tolerance,
                enforced=cfg.changepoint_excess,
                note=f"2 sum H(z_k) against mean(K_hat - K), {k:g} stderr + 1/reps",
            )
        )
    if cp is not None and cp.tail is not None and cp.spurious_sim is not None:
        limit = cfg.tail_slack * cp.tail.value
        note = f"empirical <= {cfg.tail_slack:g} x bound, w={cp.tail.width:.6g}"
        if cp.tail.warnings:
            note += "; rate hypotheses violated, not enforced"
        checks.append(
            AcceptanceCheck(
                name="tail_bound",
                analytic=cp.tail.value,
                empirical=cp.spurious_sim.mean_crossings,
                stderr=cp.spurious_sim.stderr,
                tolerance=limit,
                passed=cp.spurious_sim.mean_crossings <= limit,
                enforced=cfg.tail_bound and not cp.tail.warnings,
                note=note,
            )
        )

    if result.corollary is not None and result.crossing is not None:
        excess = result.crossing.expected_zeros - result.crossing.n_z0
        tolerance = result.crossing.quadrature_error_estimate + 4.0 * tol
        checks.append(
            AcceptanceCheck(
                name="corollary_bound",
                analytic=result.corollary.total,
                empirical=excess,
                tolerance=tolerance,
                passed=excess <= result.corollary.total + tolerance,
                enforced=cfg.corollary,
                note="E[N_z] - N_z^0 <= bound; order term with constant 1",
            )
        )
    return checks


def execute_scenario(scenario: Scenario, quadrature_tol: Optional[float] = None) -> ScenarioResult:
    """
    Run every prediction and simulation a scenario asks for.

    Args:
        scenario: Validated scenario
        quadrature_tol: Overrides the configured quadrature tolerance

    Returns:
        ScenarioResult with checks evaluated but nothing written

    Raises:
        ConfigurationError: The scenario cannot be resolved
        NumericError: A numeric step failed (tagged with its module)
    """
    tol = quadrature_tol if quadrature_tol is not None else get_settings().numerics.quadrature_tol
    notes: List[str] = []

    ctx = build_context(scenario)
    moments = counting_moments(ctx)
    classic, crossing = _crossing_predictions(moments, tol, notes)

    simulations: List[SimResult] = []
    sim = scenario.simulation
    crossing_sim: Optional[SimResult] = None
    if sim.reps > 0:
        crossing_sim = simulate_crossings(
            ctx.spec, ctx.design, ctx.truth, interval=ctx.interval,
            grid_size=sim.grid_size, reps=sim.reps, seed=sim.seed,
        )
        simulations.append(crossing_sim)
    else:
        notes.append("Monte Carlo disabled (reps = 0)")

    result = ScenarioResult(context=ctx, moments=moments, classic=classic, crossing=crossing, notes=notes)
    if scenario.changepoints.enabled:
        result.changepoints = _changepoint_predictions(ctx, crossing_sim, notes)
        if result.changepoints is not None:
            simulations.extend(s for s in (result.changepoints.excess_sim, result.changepoints.spurious_sim) if s)
        if crossing is not None:
            result.corollary = _corollary(ctx, moments, notes)
    result.simulations = simulations
    result.checks = _acceptance_checks(result, tol)

    logger.info(
        f"Scenario {scenario.name} computed",
        extra={
            "extra_fields": {
                "analytic_zeros": result.analytic_zeros,
                "checks": {c.name: c.passed for c in result.checks},
            }
        },
    )
    return result


# ============================================================================
# Artifacts
# ============================================================================

def _crossing_record(result: ScenarioResult, float_format: str) -> Dict[str, str]:
    ctx = result.context
    record = {
        "scenario": ctx.scenario.name,
        "truth": ctx.truth.describe(),
        "ell": str(ctx.spec.ell),
        "n": str(ctx.design.n),
        "halfwidth": repr(ctx.spec.h),
        "noise_sd": repr(ctx.spec.noise_sd),
        "interval_lo": repr(ctx.interval[0]),
        "interval_hi": repr(ctx.interval[1]),
        "classic_value": repr(result.classic.value),
        "classic_error_estimate": repr(result.classic.error_estimate),
        "classic_panels": str(result.classic.panels),
    }
    if result.crossing is not None:
        record.update({f"alternate_{k}": v for k, v in result.crossing.to_record().items()})
    else:
        record["alternate_skipped"] = "true"
    if result.corollary is not None:
        record["corollary_first_term"] = repr(result.corollary.first_term)
        record["corollary_order_term"] = repr(result.corollary.order_term)
        record["corollary_psi"] = ";".join(format(p, float_format) for p in result.corollary.psi)
    return record


def _changepoint_rows(cp: Optional[ChangePointResults], float_format: str) -> List[Dict[str, str]]:
    if cp is None:
        return []
    tail_terms = cp.tail.per_change_point if cp.tail is not None else [None] * len(cp.prediction.diagnostics)
    return [
        {
            "location": format(d.location, float_format),
            "next_derivative": format(d.next_derivative, float_format),
            "sigma_if": format(d.sigma_if, float_format),
            "z": format(d.z, float_format),
            "h_value": format(d.h_value, float_format),
            "tail_term": format_float(t, float_format),
        }
        for d, t in zip(cp.prediction.diagnostics, tail_terms)
    ]


def _plot_rows(result: ScenarioResult, float_format: str) -> List[Dict[str, str]]:
    """(x, y, series) triples: mean, sd, normalized mean, zero intensity and the truth."""
    moments = result.moments
    profile = MomentProfile(moments)
    s = moments.grid
    series = {
        "m": moments.m,
        "sigma": moments.sigma,
        "M": moments.normalized_mean,
        "zero_intensity": profile.classic_integrand(s),
        "truth_derivative": np.asarray(result.context.truth.derivative(result.context.spec.ell, s), dtype=float),
    }
    return [
        {"x": format(x, float_format), "y": format(y, float_format), "series": name}
        for name, values in series.items()
        for x, y in zip(s, values)
    ]


def write_artifacts(result: ScenarioResult, directory: Path) -> RunSummary:
    """
    Write every result file of a scenario into ``directory``.

    Only ``summary.csv`` carries a timestamp, on its first line.

    Returns:
        RunSummary listing the files written
    """
    float_format = get_settings().output.float_format
    columns = result.moments.columns()
    moment_rows = [
        {name: format(values[i], float_format) for name, values in columns.items()}
        for i in range(result.moments.grid.size)
    ]
    written = [
        write_csv(directory / "moments.csv", moment_rows, list(columns)),
        write_record(directory / "crossing_report.txt", _crossing_record(result, float_format)),
        write_csv(directory / "simulations.csv", [s.to_row() for s in result.simulations], SIMULATION_COLUMNS),
        write_csv(directory / "changepoints.csv", _changepoint_rows(result.changepoints, float_format), CHANGEPOINT_COLUMNS),
        write_csv(directory / "plot_data.csv", _plot_rows(result, float_format), ("x", "y", "series")),
    ]
    design_path = directory / "design.txt"
    design_path.write_text(result.context.design.to_table(), encoding="utf-8")
    written.append(design_path)
    summary = result.summary(sorted([p.name for p in written] + ["summary.csv"]))
    (directory / "summary.csv").write_text(
        timestamp_header() + csv_text(summary_rows(summary), SUMMARY_COLUMNS), encoding="utf-8"
    )
    return summary
