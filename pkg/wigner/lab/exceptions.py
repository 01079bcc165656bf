class PhaseLabError(Exception):
    """Base class for every error raised by the numerical core."""


class GridError(PhaseLabError, ValueError):
    pass


class GridMismatchError(GridError):
    pass


class StateError(PhaseLabError, ValueError):
    """A state or field violates normalisation, Hermiticity, positivity or support rules."""


class BoundaryDecayError(StateError):
    pass


class SymbolError(PhaseLabError, ValueError):
    pass


class ConfigError(PhaseLabError, ValueError):
    pass


class StabilityError(PhaseLabError):
    """The time step violates the stability rule; raised before any step is taken."""


class NumericalAbort(PhaseLabError):
    """Norm drift or non-finite values appeared while stepping."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class PartitionError(PhaseLabError, ValueError):
    pass


class SnapshotFormatError(PhaseLabError, ValueError):
    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset
