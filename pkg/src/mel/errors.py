"""Exception types shared across the package."""


class MelError(Exception):
    """Base class for all package errors."""


class UnsupportedCostError(MelError):
    pass


class InternalConsistencyError(MelError):
    """A structural property of the equilibrium set was violated (solver bug)."""


class SolverFailure(MelError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class AmbiguousNashError(SolverFailure):
    """More than one KKT-feasible configuration was found."""


class ThresholdNotFoundError(MelError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class PreconditionError(MelError):
    pass


class ConfigError(MelError):
    pass
