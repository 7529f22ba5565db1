"""Command-line parser built from the command registry."""

import argparse
from pathlib import Path
from typing import List, NoReturn, Optional, Sequence

from kernelzeros import __version__
from kernelzeros.commands.registry import CommandRegistry, get_registry
from kernelzeros.errors import ConfigurationError
from kernelzeros.models.commands import Command
from kernelzeros.models.scenario import SWEEP_PARAMETERS


class _RaisingParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting on usage errors."""

    def error(self, message: str) -> NoReturn:
        raise ConfigurationError(f"usage: {message}")


def _values(tokens: Sequence[str]) -> List[float]:
    values: List[float] = []
    for token in tokens:
        for part in token.split(","):
            part = part.strip()
            if not part:
                continue
            try:
                values.append(float(part))
            except ValueError:
                raise ConfigurationError(f"usage: --values entry '{part}' is not a number") from None
    return values


class CommandParser:
    """Parser for the ``kernelzeros`` command line."""

    def __init__(self, registry: Optional[CommandRegistry] = None) -> None:
        """Initialize the parser from the registry's command definitions."""
        self.registry = registry or get_registry()
        self.parser = self._build()

    def _build(self) -> argparse.ArgumentParser:
        parser = _RaisingParser(
            prog="kernelzeros",
            description="Zero-crossing predictions for kernel derivative estimates",
            epilog=self.registry.get_help_text(),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
        sub = parser.add_subparsers(dest="command", required=True, parser_class=_RaisingParser)

        for definition in self.registry.list_commands():
            cmd = sub.add_parser(definition.name, help=definition.description, description=definition.description)
            if not definition.takes_target:
                continue
            cmd.add_argument("config", help="Scenario file path or bundled scenario name")
            cmd.add_argument("--seed", type=int, help="Override the Monte Carlo seed")
            cmd.add_argument("--out-dir", type=Path, help="Output directory (default: KZ_OUTPUT_OUTPUT_DIR)")
            cmd.add_argument("--reps-override", type=int, help="Override the replicate count")
            cmd.add_argument("--quadrature-tol", type=float, help="Override the quadrature tolerance")
            cmd.add_argument("--check", action="store_true", help="Exit 3 when an enforced check fails")
            if definition.name == "sweep":
                cmd.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
                cmd.add_argument("--values", required=True, nargs="+", metavar="VALUE")
        return parser

    def parse(self, argv: Optional[Sequence[str]] = None) -> Command:
        """
        Parse arguments into a Command.

        Raises:
            ConfigurationError: Usage errors, including an empty or
                single-valued sweep
        """
        ns = self.parser.parse_args(argv)
        command = Command(command=ns.command)
        if not self.registry.get(ns.command).takes_target:
            return command

        command.target = ns.config
        command.seed = ns.seed
        command.out_dir = ns.out_dir
        command.reps_override = ns.reps_override
        command.quadrature_tol = ns.quadrature_tol
        command.check = ns.check
        if command.reps_override is not None and command.reps_override < 0:
            raise ConfigurationError("usage: --reps-override must be nonnegative")
        if command.quadrature_tol is not None and not command.quadrature_tol > 0.0:
            raise ConfigurationError("usage: --quadrature-tol must be positive")
        if ns.command == "sweep":
            command.param = ns.param
            command.values = _values(ns.values)
            if len(command.values) < 2:
                raise ConfigurationError(
                    f"usage: sweep needs at least two values, got {len(command.values)}"
                )
        return command


def parse_command(argv: Optional[Sequence[str]] = None) -> Command:
    """Parse a command line with the global registry."""
    return CommandParser().parse(argv)
