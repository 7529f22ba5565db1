"""Parameter sweeps over n, h or the noise level.

Each value runs the moment computation, the classic zero-count integral and,
when replicates are configured, the Monte Carlo count. Rows also carry the
finite-sample rate quantities (variance ratio error, μ², bias), whose
log-log slopes against the swept parameter check the convergence rates.
"""

from concurrent.futures import ThreadPoolExecutor
from contextvars import copy_context
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from kernelzeros.config import get_settings
from kernelzeros.errors import ConfigurationError, DomainError, PreconditionError
from kernelzeros.models.reports import SweepRow
from kernelzeros.models.scenario import SWEEP_PARAMETERS, Scenario
from kernelzeros.numerics.changepoints import ChangePointProblem, expected_false_changepoints
from kernelzeros.numerics.crossings import expected_zeros_classic
from kernelzeros.numerics.montecarlo import simulate_crossings
from kernelzeros.numerics.smoother import asymptotic_moments
from kernelzeros.utils.helpers import format_float, loglog_slope, write_csv, write_record
from kernelzeros.utils.logger import setup_logger
from kernelzeros.workflows.scenario_workflow import build_context, counting_moments

logger = setup_logger(__name__)

RATE_COLUMNS = ("variance_rel_error", "mu_sq", "max_bias")
SWEEP_COLUMNS = tuple(SweepRow.model_fields)


@dataclass
class SweepResult:
    """Sweep rows in input order plus log-log slopes of the rate columns."""

    parameter: str
    rows: List[SweepRow]
    slopes: Dict[str, float] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)


def _sweep_point(scenario: Scenario, parameter: str, value: float, tol: float) -> SweepRow:
    ctx = build_context(scenario.with_parameter(parameter, value))
    moments = counting_moments(ctx)
    grid = moments.grid

    sigma_asym, _ = asymptotic_moments(ctx.spec, ctx.dist, ctx.design.n, grid)
    variance_rel_error = float(np.max(np.abs(moments.sigma**2 / np.asarray(sigma_asym) ** 2 - 1.0)))
    truth_ell = np.asarray(ctx.truth.derivative(ctx.spec.ell, grid), dtype=float)

    row = SweepRow(
        parameter=parameter,
        value=value,
        n=ctx.design.n,
        halfwidth=ctx.spec.h,
        noise_sd=ctx.spec.noise_sd,
        analytic_zeros=expected_zeros_classic(moments, tol=tol).value,
        variance_rel_error=variance_rel_error,
        mu_sq=float(np.max(moments.mu**2)),
        max_bias=float(np.max(np.abs(moments.m - truth_ell))),
    )

    sim = scenario.simulation
    if sim.reps > 0:
        counts = simulate_crossings(
            ctx.spec, ctx.design, ctx.truth, interval=ctx.interval,
            grid_size=sim.grid_size, reps=sim.reps, seed=sim.seed,
        )
        row.empirical_zeros = counts.mean_crossings
        row.empirical_stderr = counts.stderr

    if scenario.changepoints.enabled:
        try:
            problem = ChangePointProblem.from_truth(ctx.truth, ctx.spec, ctx.dist, ctx.design.n)
            row.predicted_excess = expected_false_changepoints(problem, ctx.design).excess
        except PreconditionError as e:
            logger.warning(f"No excess prediction at {parameter}={value}: {e}")
        else:
            if row.empirical_zeros is not None and ctx.covers_interior:
                row.empirical_excess = row.empirical_zeros - problem.k
                row.excess_stderr = row.empirical_stderr
    return row


def run_sweep(
    scenario: Scenario,
    parameter: str,
    values: Sequence[float],
    quadrature_tol: Optional[float] = None,
) -> SweepResult:
    """
    Evaluate a scenario at each value of one parameter.

    Values run concurrently; rows come back in input order and each uses
    the scenario's seed, so the table does not depend on the worker count.

    Args:
        scenario: Base scenario
        parameter: One of n, h, noise_sd
        values: At least two values
        quadrature_tol: Overrides the configured quadrature tolerance

    Returns:
        SweepResult with rows and slopes

    Raises:
        ConfigurationError: Unknown parameter or fewer than two values
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigurationError(f"cannot sweep '{parameter}'; choose one of {', '.join(SWEEP_PARAMETERS)}")
    if len(values) < 2:
        raise ConfigurationError(f"a sweep needs at least two values, got {len(values)}")
    tol = quadrature_tol if quadrature_tol is not None else get_settings().numerics.quadrature_tol

    logger.info(
        f"Sweeping {parameter} over {len(values)} values",
        extra={"extra_fields": {"scenario": scenario.name, "values": list(values)}},
    )
    workers = min(len(values), get_settings().simulation.workers)
    # one copy of the caller's context per point carries the log scenario into the pool
    contexts = [copy_context() for _ in values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(ctx.run, _sweep_point, scenario, parameter, float(v), tol)
            for ctx, v in zip(contexts, values)
        ]
        rows = [future.result() for future in futures]

    result = SweepResult(parameter=parameter, rows=rows)
    x = [row.value for row in rows]
    for column in RATE_COLUMNS:
        try:
            result.slopes[column] = loglog_slope(x, [getattr(row, column) for row in rows])
        except DomainError as e:
            result.notes.append(f"no slope for {column}: {e}")
    return result


def write_sweep_artifacts(result: SweepResult, directory: Path) -> List[str]:
    """Write ``sweep.csv`` and ``slopes.txt``; returns the file names."""
    float_format = get_settings().output.float_format
    rows = []
    for row in result.rows:
        cells: Dict[str, str] = {}
        for name, value in row.model_dump().items():
            if isinstance(value, float) or value is None:
                cells[name] = format_float(value, float_format)
            else:
                cells[name] = str(value)
        rows.append(cells)
    write_csv(directory / "sweep.csv", rows, SWEEP_COLUMNS)
    record = {"parameter": result.parameter}
    record.update({f"slope_{name}": repr(value) for name, value in result.slopes.items()})
    write_record(directory / "slopes.txt", record)
    return ["slopes.txt", "sweep.csv"]
