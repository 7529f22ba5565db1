"""Command handlers for the scenario runner."""

from kernelzeros.commands.handlers.base import BaseHandler
from kernelzeros.commands.handlers.list_handler import ListHandler
from kernelzeros.commands.handlers.run_handler import RunHandler
from kernelzeros.commands.handlers.sweep_handler import SweepHandler

__all__ = [
    "BaseHandler",
    "ListHandler",
    "RunHandler",
    "SweepHandler",
]
