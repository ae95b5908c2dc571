"""Exception hierarchy shared by all dissprep modules."""


class DissprepError(Exception):
    """Base class for every error raised by this package."""


class NonSymmetricError(DissprepError, ValueError):
    pass


class InvalidModeIndexError(DissprepError, ValueError):
    pass


class InvalidSiteError(DissprepError, ValueError):
    pass


class DuplicateModeError(DissprepError, ValueError):
    pass


class NonHermitianError(DissprepError, ValueError):
    pass


class NegativeRateError(DissprepError, ValueError):
    pass


class DimensionMismatchError(DissprepError, ValueError):
    pass


class NegativeExpectationError(DissprepError, ValueError):
    pass


class SolverError(DissprepError, RuntimeError):
    """A solve or integration that could not produce a valid state."""


class NonUniqueSteadyStateError(SolverError):
    pass


class NoConvergenceError(SolverError):
    pass


class StepSizeUnderflowError(SolverError):
    pass


class MemoryBudgetExceededError(DissprepError, RuntimeError):
    pass


class ConfigError(DissprepError, ValueError):
    pass
