"""Exception hierarchy and CLI exit codes."""


class SergmError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputError(SergmError, ValueError):
    """Malformed network, covariate, manifest or model input."""

    exit_code = 2


class BoundaryError(SergmError):
    """Observed statistics sit on the boundary of the attainable set; the MLE does not exist."""

    exit_code = 3

    def __init__(self, message, terms=()):
        super().__init__(message)
        self.terms = tuple(terms)


class DegeneracyError(SergmError):
    """Simulated networks (or statistics) collapsed and carry no information."""

    exit_code = 4


class NonConvergenceError(SergmError):
    """Iterative estimation did not stabilise within the iteration budget."""

    exit_code = 5


class BudgetExceededError(SergmError):
    """Exact enumeration was requested beyond the configured state budget."""

    exit_code = 6
