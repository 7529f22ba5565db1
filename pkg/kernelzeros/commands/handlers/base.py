"""Base handler class for subcommands.

All handlers inherit from this base class and implement the handle() method.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Optional

from kernelzeros.config import get_settings
from kernelzeros.errors import KernelZerosError
from kernelzeros.models.commands import Command, CommandResult
from kernelzeros.utils.logger import setup_logger


class BaseHandler(ABC):
    """
    Abstract base class for all command handlers.

    All handlers implement handle(), which processes a command and returns
    a result; package errors are turned into results by the router.
    """

    def __init__(self, name: str, description: str):
        """
        Initialize base handler.

        Args:
            name: Handler name (e.g., "RunHandler")
            description: Brief description of what the handler does
        """
        self.name = name
        self.description = description
        self.logger = setup_logger(f"{__name__}.{name}")

    @abstractmethod
    def handle(self, command: Command) -> CommandResult:
        """
        Handle a command.

        Args:
            command: Parsed command line

        Returns:
            CommandResult with status, message and exit code

        Raises:
            KernelZerosError: Configuration or numeric failure
        """

    def output_dir(self, command: Command, name: str) -> Path:
        """Directory for a scenario's artifacts: <out-dir or default>/<name>."""
        root = command.out_dir if command.out_dir is not None else get_settings().output.output_dir
        return Path(root) / name

    def log_start(self, command: Command) -> None:
        """Log handler execution start."""
        self.logger.info(
            f"{self.name} handling '{command}'",
            extra={
                "extra_fields": {
                    "handler": self.name,
                    "command": command.command,
                    "target": command.target,
                }
            },
        )

    def log_success(self, command: Command, metadata: Optional[Dict[str, Any]] = None) -> None:
        """Log successful command execution."""
        self.logger.info(
            f"{self.name} completed successfully",
            extra={
                "extra_fields": {
                    "handler": self.name,
                    "target": command.target,
                    **(metadata or {}),
                }
            },
        )

    def log_error(self, command: Command, error: Exception) -> None:
        """Log command execution error."""
        self.logger.error(
            f"{self.name} failed: {error}",
            exc_info=not isinstance(error, KernelZerosError),
            extra={
                "extra_fields": {
                    "handler": self.name,
                    "target": command.target,
                    "error": str(error),
                    "error_type": type(error).__name__,
                }
            },
        )

    def create_error_result(self, error: KernelZerosError) -> CommandResult:
        """
        Create a standardized error result.

        Args:
            error: Package error that ended the command

        Returns:
            CommandResult carrying the error's exit code
        """
        return CommandResult(
            success=False,
            message=f"error: {error}",
            exit_code=error.exit_code,
            metadata={"error": str(error), "error_type": type(error).__name__, **error.details},
        )
