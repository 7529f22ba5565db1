"""Command parsing, registry and routing for the kernelzeros command line."""

from kernelzeros.commands.parser import CommandParser, parse_command
from kernelzeros.commands.registry import CommandRegistry, get_registry
from kernelzeros.commands.router import CommandRouter, get_router

__all__ = [
    "CommandParser",
    "CommandRegistry",
    "CommandRouter",
    "get_registry",
    "get_router",
    "parse_command",
]
