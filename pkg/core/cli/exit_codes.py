"""Exit codes for the poe CLI.

Stable codes so campaigns and scripts can tell a safety violation apart from
a bad scenario or an unreadable input file.
"""

from enum import IntEnum

from core.domain.errors import (
    ConfigInvalid,
    LedgerError,
    MalformedMessage,
    PoeError,
    TraceFormatError,
)


class ExitCode(IntEnum):
    """Standard exit codes for the poe CLI."""

    SUCCESS = 0
    INVARIANT_VIOLATION = 1
    CONFIG_ERROR = 2
    INPUT_ERROR = 3
    INTERNAL_ERROR = 4


def get_exit_code_for_exception(exception: BaseException) -> ExitCode:
    """Map exception types to appropriate exit codes.

    Args:
        exception: The exception that occurred

    Returns:
        Appropriate exit code based on exception type
    """
    return (
        _get_config_error_code(exception)
        or _get_input_error_code(exception)
        or ExitCode.INTERNAL_ERROR
    )


def _get_config_error_code(exception: BaseException) -> ExitCode | None:
    """Scenario and option errors, including YAML/schema problems."""
    if isinstance(exception, ConfigInvalid):
        return ExitCode.CONFIG_ERROR
    if _is_yaml_error(exception):
        return ExitCode.CONFIG_ERROR
    return None


def _get_input_error_code(exception: BaseException) -> ExitCode | None:
    """Missing or undecodable trace, ledger or scenario files."""
    if isinstance(exception, (TraceFormatError, MalformedMessage, LedgerError)):
        return ExitCode.INPUT_ERROR
    if isinstance(exception, (FileNotFoundError, IsADirectoryError, PermissionError)):
        return ExitCode.INPUT_ERROR
    if isinstance(exception, UnicodeDecodeError):
        return ExitCode.INPUT_ERROR
    if isinstance(exception, PoeError):
        return ExitCode.INTERNAL_ERROR
    return None


def _is_yaml_error(exception: BaseException) -> bool:
    """Check if exception comes from the YAML parser."""
    return type(exception).__module__.split(".")[0] == "yaml"
