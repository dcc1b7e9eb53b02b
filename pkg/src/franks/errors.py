"""Exception hierarchy shared by every module."""


class FranksError(Exception):
    """Base class; the CLI reports ``type(err).__name__`` on failure."""


class NonFiniteState(FranksError):
    pass


class DimensionMismatch(FranksError, ValueError):
    pass


class SingularSolution(FranksError):
    pass


class BlowUp(FranksError):
    pass


class ConstraintViolation(FranksError):
    def __init__(self, constraint, detail=""):
        self.constraint = constraint
        super().__init__(f"{constraint}: {detail}" if detail else constraint)


class PositivityViolation(FranksError):
    pass


class NonConvergence(FranksError):
    pass


class OutOfBall(FranksError):
    pass


class FocalPoint(FranksError):
    pass


class WidthExceedsChart(FranksError, ValueError):
    pass


class EstimateViolated(FranksError):
    def __init__(self, message, margins=None):
        self.margins = dict(margins or {})
        super().__init__(message)


class DegenerateFit(FranksError):
    pass


class NoDistinctEigenvalues(FranksError):
    pass


class ConfigError(FranksError, ValueError):
    pass
