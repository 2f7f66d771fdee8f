"""Exception hierarchy for gorom."""


class GoromError(Exception):
    """Base class for all gorom errors."""


class DomainError(GoromError):
    """A parameter point lies outside the model's parameter domain."""


class BundleFormatError(GoromError):
    """A problem bundle on disk is missing files or malformed."""


class FactorizationError(GoromError):
    """A matrix expected to be factorizable (SPD or invertible) is not."""


class SolverError(GoromError):
    """A full-order solve failed its residual check."""


class ReducedSolveError(GoromError):
    """A reduced system is numerically singular (discrete inf-sup failure).

    Carries the condition estimate that triggered the failure.
    """

    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond


class DegenerateTestSpaceError(GoromError):
    """The test space is degenerate under the adjoint operator."""


class UnsupportedModelError(GoromError):
    """An operation requires model properties the model does not declare."""


class GreedyAborted(GoromError):
    """A greedy run aborted; the partial trace is attached."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
