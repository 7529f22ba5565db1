"""Command handler for ``sweep``."""

from kernelzeros.commands.handlers.base import BaseHandler
from kernelzeros.models.commands import Command, CommandResult
from kernelzeros.models.scenario import load_scenario
from kernelzeros.utils.helpers import staged_output
from kernelzeros.utils.logger import LogContext
from kernelzeros.workflows.sweep_workflow import run_sweep, write_sweep_artifacts


class SweepHandler(BaseHandler):
    """Handler for the sweep command."""

    def __init__(self) -> None:
        """Initialize handler."""
        super().__init__(
            name="SweepHandler",
            description="Evaluates a scenario over one parameter and fits rate slopes",
        )

    def handle(self, command: Command) -> CommandResult:
        """Handle the sweep command."""
        self.log_start(command)

        scenario = load_scenario(command.target).with_overrides(
            seed=command.seed, reps=command.reps_override
        )
        destination = self.output_dir(command, f"{scenario.name}-sweep-{command.param}")

        with LogContext(scenario=scenario.name):
            result = run_sweep(scenario, command.param, command.values, quadrature_tol=command.quadrature_tol)
            with staged_output(destination) as stage:
                files = write_sweep_artifacts(result, stage)

        lines = [f"Sweep of {scenario.name} over {result.parameter} ({len(result.rows)} values)"]
        for name, slope in result.slopes.items():
            lines.append(f"  log-log slope of {name}: {slope:.4g}")
        lines.extend(f"  {note}" for note in result.notes)
        lines.append(f"Artifacts in {destination}: {', '.join(files)}")

        self.log_success(command, {"slopes": result.slopes})
        return CommandResult(success=True, message="\n".join(lines) + "\n", metadata={"out_dir": str(destination)})
