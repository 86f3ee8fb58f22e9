"""Exception hierarchy shared across the engine.

Exit-code mapping used by the CLI: ValidationError -> 2,
SizeGuardError -> 3, NumericalError -> 4.
"""


class EngineError(Exception):
    """Base class for all itwa-engine errors."""

    exit_code = 1


class ValidationError(EngineError):
    """Invalid input: bad parameters, malformed files, size mismatches."""

    exit_code = 2


class SizeGuardError(EngineError):
    """Request exceeds a hard size limit of an exact oracle."""

    exit_code = 3


class NumericalError(EngineError):
    """Numerical failure beyond the tolerated invalid-trajectory fraction."""

    exit_code = 4
