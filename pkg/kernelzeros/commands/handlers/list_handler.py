"""Command handler for ``list``."""

from kernelzeros.commands.handlers.base import BaseHandler
from kernelzeros.commands.registry import get_registry
from kernelzeros.models.commands import Command, CommandResult
from kernelzeros.models.scenario import bundled_scenarios, load_scenario


class ListHandler(BaseHandler):
    """Handler for the list command."""

    def __init__(self) -> None:
        super().__init__(name="ListHandler", description="Lists bundled scenarios")

    def handle(self, command: Command) -> CommandResult:
        names = bundled_scenarios()
        width = max((len(n) for n in names), default=0)
        lines = ["Bundled scenarios:", ""]
        for name in names:
            lines.append(f"  {name:<{width}}  {load_scenario(name).description}")
        lines.append("")
        return CommandResult(success=True, message="\n".join(lines) + "\n" + get_registry().get_help_text())
