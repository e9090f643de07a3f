"""Exception types shared across the package."""


class ClhjError(Exception):
    """Base class for all package errors."""


class CatalogError(ClhjError):
    """Unknown catalog entry or parameter outside its documented range."""


class EvaluationError(ClhjError):
    """A model callable returned a non-finite value.

    Carries the offending sample point so failures are reproducible.
    """

    def __init__(self, message, x=None, u=None, time=None, state=None):
        super().__init__(message)
        self.x = x
        self.u = u
        self.time = time
        self.state = state


class StructuralError(ClhjError):
    """An operation was applied to a problem whose structure it does not support."""


class StabilityError(ClhjError):
    """Requested time step exceeds the stability bound."""

    def __init__(self, message, dt=None, dt_stable=None, time=None, state=None):
        super().__init__(message)
        self.dt = dt
        self.dt_stable = dt_stable
        self.time = time
        self.state = state


class GridMismatchError(ClhjError):
    """Two fields that must share a grid do not."""


class AssumptionError(ClhjError):
    """An experiment refused to run because a required assumption is violated.

    The full AssumptionReport is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class AuditError(ClhjError):
    """An audit was handed a run without the metadata it needs."""


class ScenarioError(ClhjError):
    """Scenario file is malformed; message names the key and line."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line
