"""Exception types shared across the package."""


class NtdBallError(Exception):
    """Base class for all package errors."""


class InvalidParams(NtdBallError):
    """A precondition on user-supplied parameters was violated."""


class NotStrictlySubcritical(NtdBallError):
    """Exponent pair is on or above the critical curve; the sup-norm
    exponents are undefined there."""


class BandLimitMismatch(NtdBallError):
    """Coefficient band limit incompatible with the target grid."""


class DataMismatch(NtdBallError):
    """Trace and Neumann data do not belong to one solution."""


class ZeroData(NtdBallError):
    """An operation that normalizes by a norm received zero data."""


class SolveFailure(NtdBallError):
    """Base class for non-converged solves.

    Carries the iteration count and the residual history so that sweep
    drivers can record the outcome instead of aborting.
    """

    outcome = "Failed"

    def __init__(self, message, iterations=0, history=None):
        super().__init__(message)
        self.iterations = iterations
        self.history = list(history) if history is not None else []


class MaxIterations(SolveFailure):
    """Iteration budget exhausted before the residual tolerance was met."""

    outcome = "MaxIterations"


class Blowup(SolveFailure):
    """Iterates left the divergence threshold; expected for strong
    coupling near criticality."""

    outcome = "Blowup"


class NonFinite(SolveFailure):
    """NaN or Inf encountered during iteration."""

    outcome = "Blowup"
