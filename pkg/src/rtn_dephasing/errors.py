"""Exception hierarchy shared by all modules."""


class DephasingError(Exception):
    """Base class for computational failures."""


class PreconditionError(DephasingError, ValueError):
    pass


class RootFindingError(DephasingError):
    """Polynomial root finder failed; ``partial`` carries whatever was computed."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InternalConsistencyError(DephasingError):
    pass


class NonDecayingError(DephasingError):
    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class ZeroCrossingError(DephasingError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class UnsupportedOperationError(DephasingError):
    pass


class NonPhysicalProbabilityError(DephasingError):
    """The generalized master equation produced a probability outside [0, 1]."""


class ScanResolutionError(DephasingError):
    pass


class BracketError(DephasingError, ValueError):
    pass


class ConfigurationError(DephasingError, ValueError):
    pass


class ContourError(DephasingError):
    pass
