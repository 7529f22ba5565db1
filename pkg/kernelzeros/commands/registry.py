"""Subcommands of the ``kernelzeros`` command line and their help text."""

from dataclasses import dataclass
from typing import Dict, List, Tuple

EXIT_CODES: Tuple[Tuple[int, str], ...] = (
    (0, "success"),
    (1, "malformed scenario, unknown scenario name or usage error"),
    (2, "numeric failure (degenerate process, quadrature, violated precondition)"),
    (3, "an enforced acceptance check failed under --check"),
)


@dataclass(frozen=True)
class CommandDefinition:
    """One subcommand.

    Attributes:
        name: Subcommand name
        description: One-line summary shown in help output
        example: Example invocation
        takes_target: Whether a scenario name or path is required
    """

    name: str
    description: str
    example: str
    takes_target: bool = True


_DEFAULT_COMMANDS = (
    CommandDefinition(
        name="run",
        description="Run a scenario: analytic predictions, Monte Carlo counterparts and result tables",
        example="kernelzeros run rice-check --check",
    ),
    CommandDefinition(
        name="sweep",
        description="Evaluate a scenario over several values of n, h or noise_sd",
        example="kernelzeros sweep smoother-l0 --param h --values 0.2,0.1,0.05",
    ),
    CommandDefinition(
        name="list",
        description="List the bundled scenarios",
        example="kernelzeros list",
        takes_target=False,
    ),
)


class CommandRegistry:
    """Ordered collection of subcommands; the parser is built from it."""

    def __init__(self) -> None:
        self._commands: Dict[str, CommandDefinition] = {}
        for definition in _DEFAULT_COMMANDS:
            self.register(definition)

    def register(self, definition: CommandDefinition) -> None:
        """Add a subcommand, replacing any with the same name."""
        self._commands[definition.name] = definition

    def get(self, name: str) -> CommandDefinition:
        """
        Look up a subcommand.

        Raises:
            KeyError: If no subcommand has this name
        """
        return self._commands[name]

    def list_commands(self) -> List[CommandDefinition]:
        """Subcommands in registration order."""
        return list(self._commands.values())

    def get_help_text(self) -> str:
        """Commands with examples, followed by the exit codes."""
        lines = ["Commands:"]
        for cmd in self._commands.values():
            lines.append(f"  {cmd.name:<6} {cmd.description}")
            lines.append(f"         e.g. {cmd.example}")
        lines.append("")
        lines.append("Exit codes:")
        lines.extend(f"  {code}  {meaning}" for code, meaning in EXIT_CODES)
        return "\n".join(lines) + "\n"


_registry = CommandRegistry()


def get_registry() -> CommandRegistry:
    """The process-wide registry."""
    return _registry
