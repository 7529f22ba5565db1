"""Command models for the scenario runner's command line."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional


@dataclass
class Command:
    """A parsed command line.

    Attributes:
        command: Subcommand name (run, sweep, list)
        target: Scenario file path or bundled scenario name
        check: Enforce acceptance tolerances (exit 3 on failure)
        seed: Overrides the Monte Carlo seed of the scenario
        out_dir: Overrides the output directory
        reps_override: Overrides the replicate count
        quadrature_tol: Overrides the quadrature tolerance
        param: Swept parameter (sweep only)
        values: Swept values (sweep only)
    """

    command: str
    target: Optional[str] = None
    check: bool = False
    seed: Optional[int] = None
    out_dir: Optional[Path] = None
    reps_override: Optional[int] = None
    quadrature_tol: Optional[float] = None
    param: Optional[str] = None
    values: List[float] = field(default_factory=list)

    def __str__(self) -> str:
        """Command line this command was parsed from, options normalized."""
        parts = [self.command]
        if self.target:
            parts.append(self.target)
        if self.param:
            parts.extend(["--param", self.param, "--values", ",".join(f"{v:g}" for v in self.values)])
        if self.check:
            parts.append("--check")
        return " ".join(parts)


@dataclass
class CommandResult:
    """What a handler reports back to the entry point.

    Attributes:
        success: True when the command did what it was asked
        message: Text printed to stdout (or stderr on failure)
        exit_code: Process exit status
        metadata: Extra values for logging
    """

    success: bool
    message: str
    exit_code: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict)
