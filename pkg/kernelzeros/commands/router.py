"""Command router for directing parsed commands to their handlers."""

from typing import Dict, Optional

from kernelzeros.commands.handlers import BaseHandler, ListHandler, RunHandler, SweepHandler
from kernelzeros.errors import ConfigurationError, KernelZerosError
from kernelzeros.models.commands import Command, CommandResult
from kernelzeros.utils.logger import setup_logger

logger = setup_logger(__name__)


class CommandRouter:
    """
    Routes commands to handlers.

    The router:
    1. Looks up the handler registered for the subcommand
    2. Executes it
    3. Converts package errors into results carrying their exit code
    """

    def __init__(self) -> None:
        self.handlers: Dict[str, BaseHandler] = {}

    def register(self, command: str, handler: BaseHandler) -> None:
        """
        Register a handler for a command.

        Example:
            >>> router.register("run", RunHandler())
        """
        self.handlers[command.lower()] = handler
        logger.debug(
            f"Registered handler: {handler.name} for '{command}'",
            extra={"extra_fields": {"command": command, "handler": handler.name}},
        )

    def route(self, command: Command) -> CommandResult:
        """
        Execute a command with its handler.

        Returns:
            The handler's result, or an error result whose exit code comes
            from the package error that stopped it
        """
        handler = self.handlers.get(command.command)
        if handler is None:
            error = ConfigurationError(f"no handler for command '{command.command}'")
            return CommandResult(success=False, message=f"error: {error}", exit_code=error.exit_code)
        try:
            return handler.handle(command)
        except KernelZerosError as e:
            handler.log_error(command, e)
            return handler.create_error_result(e)


_router: Optional[CommandRouter] = None


def get_router() -> CommandRouter:
    """Router with the run, sweep and list handlers registered."""
    global _router
    if _router is None:
        _router = CommandRouter()
        _router.register("run", RunHandler())
        _router.register("sweep", SweepHandler())
        _router.register("list", ListHandler())
    return _router
