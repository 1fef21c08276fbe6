"""Exception types raised by fockecho."""


class FockEchoError(Exception):
    """Base class for all library errors."""


class ContractError(FockEchoError, ValueError):
    """Inputs violate a documented precondition (shapes, sectors, ranges)."""


class TruncationError(FockEchoError):
    """Probability leaked into the top of the truncated Fock basis."""


class ConvergenceError(FockEchoError):
    """The propagator could not reach the requested accuracy within its budget."""


class BelowBarrierError(FockEchoError, ValueError):
    """The energy does not exceed the crossing energy, so the packet never reaches q_C."""


class ExtractionError(FockEchoError):
    """A trace does not contain the window needed for an analysis."""


class FitDomainError(FockEchoError):
    """A fit was requested on data outside its domain of validity."""
