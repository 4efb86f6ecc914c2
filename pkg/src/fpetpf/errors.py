"""Exception hierarchy shared by the solver, alignment, transport and harness."""


class FPETPFError(Exception):
    """Base class for all package errors."""


class InvalidInput(FPETPFError, ValueError):
    pass


class InvalidPath(FPETPFError, ValueError):
    pass


class NonPhysicalState(FPETPFError):
    """Non-positive density or pressure somewhere on the grid."""

    def __init__(self, message, index=None, quantity=None):
        super().__init__(message)
        self.index = index
        self.quantity = quantity


class CflViolation(FPETPFError):
    pass


class TimeMismatch(FPETPFError, ValueError):
    pass


class AllZeroLikelihood(FPETPFError):
    pass


class VacuumFormation(FPETPFError):
    pass


class ConfigError(FPETPFError, ValueError):
    pass
