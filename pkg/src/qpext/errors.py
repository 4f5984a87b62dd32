"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class QpextError(Exception):
    """Base class for all library errors."""


class ValidationError(QpextError, ValueError):
    """Input violates a documented invariant (exit code 1)."""


class SizeLimitError(QpextError):
    """An exact computation would exceed the enumeration limit (exit code 2)."""


class ExactModeError(SizeLimitError):
    """Exact mode needs an integer ``2**k``; raised for fractional powers."""


class SolverError(QpextError):
    """The SDP solver failed to produce an optimal certificate (exit code 3)."""


class ConvergenceError(SolverError):
    """An iterative linear-algebra routine hit its iteration cap."""
