"""Exception hierarchy shared by all modules."""


class BarycenterError(Exception):
    """Base class for every error raised by this package."""


class ParseError(BarycenterError):
    """A measure or result document could not be parsed."""


class ValidationError(BarycenterError):
    """Input parsed but violates a measure invariant."""


class SizeError(BarycenterError):
    """A configured size cap (tuples, variables, nodes) would be exceeded."""


class NumericalError(BarycenterError):
    """The LP engine lost numerical control of the basis."""


class DimensionError(BarycenterError):
    """An operation requires a specific ambient dimension."""


class InfeasibleTransport(BarycenterError):
    """A transport violates its marginal constraints."""


class BudgetExceeded(BarycenterError):
    """The brute-force oracle ran out of enumeration budget."""


class SolverFailure(BarycenterError):
    """The LP did not reach an optimal status."""

    def __init__(self, status, message=""):
        self.status = status
        super().__init__(message or f"LP solve ended with status {status}")
