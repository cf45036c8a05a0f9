"""Exception hierarchy.

Every error carries a short ``code`` used by the command line front end to
pick an exit status and a machine-parsable message prefix.
"""


class TilegenError(Exception):
    code = "E_TILEGEN"
    exit_status = 1


class NumericError(TilegenError):
    code = "E_NUMERIC"
    exit_status = 3


class NonFiniteDensity(NumericError):
    code = "E_NONFINITE"


class QuadratureFailure(NumericError):
    code = "E_QUADRATURE"


class DegenerateDensity(NumericError):
    code = "E_DEGENERATE"


class DomainError(NumericError, ValueError):
    code = "E_DOMAIN"


class ParameterError(NumericError, ValueError):
    code = "E_PARAMETER"


class InvalidTable(TilegenError, ValueError):
    code = "E_TABLE"
    exit_status = 4


class FormatError(TilegenError):
    code = "E_FORMAT"
    exit_status = 4


class InternalError(TilegenError):
    code = "E_INTERNAL"
    exit_status = 3


class MemoryBudgetExceeded(NumericError):
    """Raised when the next refinement would exceed the memory cap.

    ``table`` and ``history`` hold the deepest table built so far and the
    per-level statistics that led to it.
    """

    code = "E_MEMORY"

    def __init__(self, message, table=None, history=None):
        super().__init__(message)
        self.table = table
        self.history = list(history or [])


class SpecError(ParameterError):
    """Malformed textual density or mass-point description."""

    code = "E_USAGE"
    exit_status = 2
