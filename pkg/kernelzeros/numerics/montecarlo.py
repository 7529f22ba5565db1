"""Monte Carlo ground truth for the zero-count predictions.

Each replicate draws i.i.d. N(0, σ²) errors, forms y = f(t_i) + ε_i and
evaluates the estimate on a counting grid through the sparse coefficient
matrix. Replicate r always uses the r-th child of ``SeedSequence(seed)``,
so the noise, and with it every count, is independent of the batch size and
of the number of worker threads.

Counting grids have 2^k + 1 nodes. The grid of one level is every other
node of the next, so a single pass yields counts at two nested resolutions
and the refinement check costs no extra simulation.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse

from kernelzeros.config import get_settings
from kernelzeros.errors import DomainError
from kernelzeros.models.reports import SimResult
from kernelzeros.numerics.design import Design
from kernelzeros.numerics.smoother import SmootherSpec, TruthFn, coefficient_matrix
from kernelzeros.utils.decorators import with_module_context
from kernelzeros.utils.logger import log_performance, setup_logger

logger = setup_logger(__name__)

# (grid, Z with one replicate per row) -> one value per replicate
Statistic = Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]]

MIN_GRID_SIZE = 256
# elements of one batch's (replicates, nodes) block
_BATCH_ELEMENTS = 1 << 22


def count_zero_crossings(
    values: ArrayLike,
    pair_mask: Optional[NDArray[np.bool_]] = None,
    node_mask: Optional[NDArray[np.bool_]] = None,
) -> NDArray[np.int64]:
    """
    Zero count per row of a (replicates, nodes) array.

    A strict sign change between neighbouring nodes is one zero; a node
    that is exactly zero is one zero. Masks restrict the count to selected
    node pairs and nodes.
    """
    z = np.atleast_2d(np.asarray(values, dtype=float))
    changes = z[:, :-1] * z[:, 1:] < 0.0
    exact = z == 0.0
    if pair_mask is not None:
        changes &= pair_mask[None, :]
    if node_mask is not None:
        exact &= node_mask[None, :]
    return changes.sum(axis=1) + exact.sum(axis=1)


def counting_grid(interval: Tuple[float, float], size: int) -> NDArray[np.float64]:
    """Equispaced nodes over the counting interval."""
    lo, hi = interval
    if not lo < hi:
        raise DomainError(f"counting interval must have positive length, got [{lo}, {hi}]")
    return np.linspace(lo, hi, size)


def _all_crossings(grid: NDArray[np.float64], z: NDArray[np.float64]) -> NDArray[np.float64]:
    return count_zero_crossings(z).astype(float)


def _outside_windows_statistic(change_points: Sequence[float], w: float) -> Statistic:
    centers = np.asarray(change_points, dtype=float)

    def statistic(grid: NDArray[np.float64], z: NDArray[np.float64]) -> NDArray[np.float64]:
        def outside(x: NDArray[np.float64]) -> NDArray[np.bool_]:
            if centers.size == 0:
                return np.ones(x.shape, dtype=bool)
            return np.all(np.abs(x[:, None] - centers[None, :]) > w, axis=1)

        midpoints = 0.5 * (grid[:-1] + grid[1:])
        counts = count_zero_crossings(z, pair_mask=outside(midpoints), node_mask=outside(grid))
        return (counts > 0).astype(float)

    return statistic


class _Engine:
    """One simulation setup evaluated at successive counting-grid levels."""

    def __init__(
        self,
        spec: SmootherSpec,
        d: Design,
        f: TruthFn,
        interval: Tuple[float, float],
        reps: int,
        seed: int,
        statistic: Statistic,
    ):
        settings = get_settings().simulation
        self.spec = spec
        self.design = d
        self.f_values = np.asarray(f(d.points), dtype=float)
        self.interval = interval
        self.seeds = np.random.SeedSequence(seed).spawn(reps)
        self.statistic = statistic
        self.batch_size = settings.batch_size
        self.workers = settings.workers

    def _noise(self, chunk: Sequence[np.random.SeedSequence]) -> NDArray[np.float64]:
        columns = [np.random.default_rng(ss).standard_normal(self.design.n) for ss in chunk]
        return self.spec.noise_sd * np.column_stack(columns)

    def evaluate(self, size: int) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Per-replicate statistic on the grid of ``size`` nodes and on its half-resolution subgrid."""
        grid = counting_grid(self.interval, size)
        a: sparse.csr_matrix = coefficient_matrix(self.spec, self.design, grid)
        mean = a @ self.f_values
        batch = max(1, min(self.batch_size, _BATCH_ELEMENTS // size))
        chunks = [self.seeds[i : i + batch] for i in range(0, len(self.seeds), batch)]

        def work(chunk: Sequence[np.random.SeedSequence]) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
            z = (mean[:, None] + a @ self._noise(chunk)).T
            return self.statistic(grid, z), self.statistic(grid[::2], z[:, ::2])

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            results = list(pool.map(work, chunks))
        fine = np.concatenate([r[0] for r in results])
        coarse = np.concatenate([r[1] for r in results])
        return fine, coarse


def _summarize(values: NDArray[np.float64], offset: float) -> Tuple[float, float]:
    mean = float(values.mean()) - offset
    stderr = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
    return mean, stderr


def _run(
    engine: _Engine,
    grid_size: Optional[int],
    seed: int,
    label: str,
    offset: float = 0.0,
) -> SimResult:
    settings = get_settings().simulation
    size = settings.counting_grid_size if grid_size is None else grid_size
    if size < MIN_GRID_SIZE:
        raise DomainError(f"counting grid needs at least {MIN_GRID_SIZE} nodes, got {size}")
    if size % 2 == 0:
        size += 1
    cap = max(settings.max_counting_grid_size, size)

    while True:
        fine, coarse = engine.evaluate(size)
        mean, stderr = _summarize(fine, offset)
        coarse_mean, _ = _summarize(coarse, offset)
        delta = abs(mean - coarse_mean)
        converged = delta == 0.0 or delta < stderr / 2.0
        logger.debug(
            "Counting grid level evaluated",
            extra={"extra_fields": {"label": label, "size": size, "mean": mean, "delta": delta}},
        )
        if converged or not settings.auto_refine:
            break
        if 2 * size - 1 > cap:
            logger.warning(
                f"Counting grid capped at {size} nodes before the mean settled",
                extra={"extra_fields": {"label": label, "delta": delta, "stderr": stderr}},
            )
            break
        size = 2 * size - 1

    return SimResult(
        label=label,
        mean_crossings=mean,
        stderr=stderr,
        replicates=fine.size,
        counting_grid_size=size,
        seed=seed,
    )


def _check_reps(reps: int) -> None:
    if reps < 1:
        raise DomainError(f"replicates must be at least 1, got {reps}")


@with_module_context("montecarlo")
@log_performance(logger, "simulate_crossings", threshold_seconds=30.0)
def simulate_crossings(
    spec: SmootherSpec,
    d: Design,
    f: TruthFn,
    interval: Optional[Tuple[float, float]] = None,
    grid_size: Optional[int] = None,
    reps: int = 1000,
    seed: int = 0,
    label: str = "crossings",
) -> SimResult:
    """
    Mean number of zeros of f̂^(ℓ) over ``interval``.

    Args:
        spec: Estimator
        d: Design
        f: Vectorized truth
        interval: Counting interval inside [h, 1 - h]; defaults to all of it
        grid_size: Initial counting-grid nodes (settings default)
        reps: Replicates
        seed: Root seed
        label: Row label of the result

    Returns:
        SimResult at the resolution where refinement stopped changing the mean
    """
    _check_reps(reps)
    engine = _Engine(spec, d, f, interval or spec.interior, reps, seed, _all_crossings)
    return _run(engine, grid_size, seed, label)


@with_module_context("montecarlo")
@log_performance(logger, "simulate_changepoint_excess", threshold_seconds=30.0)
def simulate_changepoint_excess(
    spec: SmootherSpec,
    d: Design,
    f: TruthFn,
    true_change_points: Sequence[float],
    reps: int = 1000,
    seed: int = 0,
    grid_size: Optional[int] = None,
) -> SimResult:
    """Mean of K̂ - K, with K̂ the zero count of f̂^(ℓ) on [h, 1 - h]."""
    _check_reps(reps)
    engine = _Engine(spec, d, f, spec.interior, reps, seed, _all_crossings)
    return _run(engine, grid_size, seed, "changepoint_excess", offset=float(len(true_change_points)))


@with_module_context("montecarlo")
@log_performance(logger, "simulate_spurious_frequency", threshold_seconds=30.0)
def simulate_spurious_frequency(
    spec: SmootherSpec,
    d: Design,
    f: TruthFn,
    change_points: Sequence[float],
    w: float,
    reps: int = 1000,
    seed: int = 0,
    grid_size: Optional[int] = None,
) -> SimResult:
    """
    Fraction of replicates with a zero of f̂^(ℓ) outside every window x_k ± w.

    A sign change between two nodes counts as outside when the midpoint of
    the pair is.
    """
    _check_reps(reps)
    if w <= 0.0:
        raise DomainError(f"window half-width must be positive, got {w}")
    engine = _Engine(
        spec, d, f, spec.interior, reps, seed, _outside_windows_statistic(change_points, w)
    )
    return _run(engine, grid_size, seed, "spurious_frequency")


def replicate_counts(
    spec: SmootherSpec,
    d: Design,
    f: TruthFn,
    grid_size: int,
    reps: int,
    seed: int,
    interval: Optional[Tuple[float, float]] = None,
) -> List[int]:
    """Raw per-replicate zero counts at a fixed grid size (no refinement)."""
    _check_reps(reps)
    engine = _Engine(spec, d, f, interval or spec.interior, reps, seed, _all_crossings)
    fine, _ = engine.evaluate(grid_size)
    return [int(v) for v in fine]
