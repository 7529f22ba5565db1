"""Decorator tagging package errors with the numeric module they came from."""

from functools import wraps
from typing import Any, Callable, TypeVar

from kernelzeros.errors import KernelZerosError

F = TypeVar("F", bound=Callable[..., Any])


def with_module_context(module: str) -> Callable[[F], F]:
    """
    Tag package errors escaping the decorated function with a module name.

    Errors that already carry a module keep it; the innermost numeric module
    is the one worth reporting.

    Args:
        module: Module name shown in CLI diagnostics (e.g. "crossings")

    Returns:
        Decorator function

    Example:
        ```python
        @with_module_context("crossings")
        def expected_zeros_classic(mom, tol=None):
            ...
        ```
    """

    def decorator(func: F) -> F:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            try:
                return func(*args, **kwargs)
            except KernelZerosError as e:
                if e.module is None:
                    e.module = module
                raise

        return wrapper  # type: ignore[return-value]

    return decorator
