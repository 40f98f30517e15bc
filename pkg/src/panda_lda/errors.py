"""Exception types raised across the package."""


class PandaError(Exception):
    """Base class for all package errors."""


class InvalidInputError(PandaError, ValueError):
    pass


class InsufficientDataError(PandaError, ValueError):
    pass


class IllConditionedError(PandaError, ValueError):
    pass


class DegenerateRuleError(PandaError, ValueError):
    """Raised when a linear rule has a zero direction and its risk is undefined."""


class InvalidParameterError(PandaError, ValueError):
    pass


class SolverDivergedError(PandaError, RuntimeError):
    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class EstimatorInfeasibleError(PandaError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConstructionError(PandaError, RuntimeError):
    pass


class TuningFailedError(PandaError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []
