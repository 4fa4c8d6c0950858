"""Exception hierarchy shared by every module of the package."""


class AtemError(Exception):
    """Base class for all errors raised by :mod:`pdm_atem`."""


class NumericalError(AtemError):
    """A computation could not produce a trustworthy number."""


class SeriesOverflowError(NumericalError):
    pass


class DegenerateSeriesError(NumericalError):
    pass


class SingularAtOriginError(NumericalError):
    pass


class NegativeSqrtError(NumericalError):
    pass


class IterationOverflowError(NumericalError):
    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite recurrence value at step n={step}")


class ParityNotApplicableError(NumericalError):
    pass


class DegenerateBoundaryError(NumericalError):
    pass


class RescaleUnderflowError(NumericalError):
    pass


class DomainTooSmallError(NumericalError):
    pass


class ExprError(AtemError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class UnboundParameterError(ExprError):
    pass


class ExprEvalError(ExprError, ArithmeticError):
    pass


class UnphysicalMassError(NumericalError):
    pass


class OrderingConstraintError(AtemError, ValueError):
    pass


class ConfigError(AtemError, ValueError):
    pass
