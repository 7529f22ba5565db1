"""Command handler for ``run``."""

import time

from kernelzeros.commands.handlers.base import BaseHandler
from kernelzeros.errors import AcceptanceError
from kernelzeros.models.commands import Command, CommandResult
from kernelzeros.models.scenario import load_scenario
from kernelzeros.utils.helpers import generate_run_summary, staged_output
from kernelzeros.utils.logger import LogContext
from kernelzeros.workflows.scenario_workflow import execute_scenario, write_artifacts


class RunHandler(BaseHandler):
    """Handler for the run command."""

    def __init__(self) -> None:
        """Initialize handler."""
        super().__init__(
            name="RunHandler",
            description="Runs one scenario and writes its result tables",
        )

    def handle(self, command: Command) -> CommandResult:
        """Handle the run command."""
        self.log_start(command)
        start = time.perf_counter()

        scenario = load_scenario(command.target).with_overrides(
            seed=command.seed, reps=command.reps_override
        )
        destination = self.output_dir(command, scenario.name)

        with LogContext(scenario=scenario.name):
            result = execute_scenario(scenario, quadrature_tol=command.quadrature_tol)
            with staged_output(destination) as stage:
                summary = write_artifacts(result, stage)

        message = generate_run_summary(summary, time.perf_counter() - start, destination)
        if summary.notes:
            message += "\nNotes:\n" + "".join(f"  {note}\n" for note in summary.notes)

        if command.check and not summary.passed:
            failed = ", ".join(c.name for c in summary.failures)
            error = AcceptanceError(f"acceptance checks failed: {failed}", module="cli")
            self.log_error(command, error)
            return CommandResult(success=False, message=message, exit_code=error.exit_code)

        self.log_success(command, {"passed": summary.passed, "checks": len(summary.checks)})
        return CommandResult(success=True, message=message, metadata={"out_dir": str(destination)})
