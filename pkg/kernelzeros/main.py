"""Console entry point of the ``kernelzeros`` command.

Exit codes: 0 success, 1 configuration or usage error, 2 numeric failure,
3 acceptance-check failure under ``--check``.
"""

import sys
from typing import Optional, Sequence

from kernelzeros.commands import get_router, parse_command
from kernelzeros.config import get_settings
from kernelzeros.errors import KernelZerosError
from kernelzeros.utils.logger import setup_logger

logger = setup_logger(__name__)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse the command line, run the command and print its result.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])

    Returns:
        Process exit code
    """
    try:
        command = parse_command(argv)
    except KernelZerosError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    settings = get_settings()
    logger.debug(
        f"Starting {settings.app_name} v{settings.app_version}",
        extra={"extra_fields": {"command": str(command)}},
    )

    result = get_router().route(command)
    print(result.message, end="", file=sys.stdout if result.success else sys.stderr)
    if result.message and not result.message.endswith("\n"):
        print(file=sys.stdout if result.success else sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
