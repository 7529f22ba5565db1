"""Helper functions shared by the scenario and sweep workflows.

This module provides result-file writers, the staged output directory that
keeps failed runs from leaving partial artifacts, rate-slope estimation and
summary formatting.
"""

import csv
import io
import shutil
import tempfile
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Optional, Sequence

import numpy as np

from kernelzeros.errors import DomainError
from kernelzeros.models.reports import RunSummary
from kernelzeros.utils.logger import setup_logger

logger = setup_logger(__name__)


# ============================================================================
# Result Files
# ============================================================================

def csv_text(rows: Sequence[Mapping[str, str]], columns: Optional[Sequence[str]] = None) -> str:
    """
    Render rows as CSV text with ``\\n`` line endings.

    Args:
        rows: One mapping per row
        columns: Column order; defaults to the keys of the first row

    Returns:
        CSV text including the header line

    Example:
        >>> csv_text([{"x": "1", "y": "2"}])
        'x,y\\n1,2\\n'
    """
    fieldnames = list(columns) if columns is not None else (list(rows[0]) if rows else [])
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def write_csv(
    path: Path, rows: Sequence[Mapping[str, str]], columns: Optional[Sequence[str]] = None
) -> Path:
    """Write rows to ``path`` as CSV and return the path."""
    path.write_text(csv_text(rows, columns), encoding="utf-8")
    return path


def write_record(path: Path, record: Mapping[str, str]) -> Path:
    """Write a flat ``key=value`` record file, one pair per line, keys in order."""
    path.write_text("".join(f"{key}={value}\n" for key, value in record.items()), encoding="utf-8")
    return path


def timestamp_header() -> str:
    """The only line of a result file allowed to change between identical runs."""
    return f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n"


@contextmanager
def staged_output(destination: Path) -> Iterator[Path]:
    """
    Stage artifacts in a temporary directory and publish them on success.

    Files are moved into ``destination`` only when the block exits without
    an exception; otherwise the staging directory is removed and
    ``destination`` is left untouched.

    Args:
        destination: Final output directory (created if missing)

    Yields:
        The staging directory to write into

    Example:
        >>> with staged_output(Path("results/rice-check")) as stage:
        ...     write_csv(stage / "simulations.csv", rows)
    """
    destination.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=f".{destination.name}-", dir=destination.parent))
    try:
        yield stage
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    destination.mkdir(parents=True, exist_ok=True)
    for item in sorted(stage.iterdir()):
        target = destination / item.name
        if target.exists():
            target.unlink()
        shutil.move(str(item), str(target))
    shutil.rmtree(stage, ignore_errors=True)
    logger.debug(f"Published artifacts to {destination}")


# ============================================================================
# Rates
# ============================================================================

def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Least-squares slope of log|y| against log x.

    Points with x ≤ 0 or y == 0 are dropped.

    Raises:
        DomainError: Fewer than two usable points
    """
    xs = np.asarray(x, dtype=float)
    ys = np.abs(np.asarray(y, dtype=float))
    keep = (xs > 0.0) & (ys > 0.0) & np.isfinite(ys)
    if keep.sum() < 2:
        raise DomainError(f"a log-log slope needs two usable points, got {int(keep.sum())}")
    slope, _ = np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)
    return float(slope)


# ============================================================================
# Formatting Helpers
# ============================================================================

def format_duration(seconds: float) -> str:
    """
    Format duration in seconds to human-readable string.

    Example:
        >>> format_duration(125.5)
        '2m 5s'
        >>> format_duration(45.2)
        '45.2s'
    """
    if seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        minutes = int(seconds // 60)
        secs = int(seconds % 60)
        return f"{minutes}m {secs}s"
    else:
        hours = int(seconds // 3600)
        minutes = int((seconds % 3600) // 60)
        secs = int(seconds % 60)
        return f"{hours}h {minutes}m {secs}s"


def format_float(value: Optional[float], float_format: str = ".12g") -> str:
    """Table cell for an optional float; ``None`` becomes an empty cell."""
    return "" if value is None else format(value, float_format)


# ============================================================================
# Summary Generation
# ============================================================================

def generate_run_summary(
    summary: RunSummary,
    duration_seconds: Optional[float] = None,
    out_dir: Optional[Path] = None,
) -> str:
    """
    Generate a formatted run summary for the terminal.

    Args:
        summary: Outcome of the run
        duration_seconds: Wall time, shown when given
        out_dir: Where the artifacts were published

    Returns:
        Formatted summary string
    """
    status = "PASSED" if summary.passed else "FAILED"

    text = f"""
Scenario Run Summary
{'=' * 50}
Scenario: {summary.scenario}
Halfwidth: {summary.halfwidth:.6g}
Noise sd: {summary.noise_sd:.6g}
Status: {status}
"""
    if duration_seconds is not None:
        text += f"Duration: {format_duration(duration_seconds)}\n"

    if summary.checks:
        text += "\nChecks:\n"
        for check in summary.checks:
            mark = "pass" if check.passed else "FAIL"
            text += (
                f"  [{mark}] {check.name}: analytic={check.analytic:.6g} "
                f"empirical={check.empirical:.6g} tolerance={check.tolerance:.3g}\n"
            )
            if check.note:
                text += f"         {check.note}\n"

    if out_dir is not None:
        text += f"\nArtifacts in {out_dir}:\n"
        for name in summary.artifacts:
            text += f"  {name}\n"

    return text


def summary_rows(summary: RunSummary) -> List[Dict[str, str]]:
    """Rows of the summary table; verdicts are recomputable from the raw tables."""
    return [check.to_row() for check in summary.checks]
