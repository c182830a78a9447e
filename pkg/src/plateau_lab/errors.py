"""Exception types raised across the package."""


class PlateauLabError(Exception):
    pass


class DegenerateSeminormError(PlateauLabError, ValueError):
    """The seminorm vanishes on a line, so it has no bounded unit ball."""


class NonConvergenceError(PlateauLabError, RuntimeError):
    pass


class DomainError(PlateauLabError, ValueError):
    """Coordinates fall outside the chart domain of a target space."""


class ChartStraddleError(PlateauLabError, ValueError):
    """A triangle has images in two different charts of a glued space."""


class InsufficientSamplesError(PlateauLabError, ValueError):
    pass


class InfeasibleBoundaryError(PlateauLabError, ValueError):
    """The boundary polyline is not a Jordan curve."""


class NonDecreaseError(PlateauLabError, RuntimeError):
    """The line search could not decrease the functional at all.

    The partial convergence trace is kept on ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class DeformationDegenerateError(PlateauLabError, ValueError):
    pass


class ZeroLengthError(PlateauLabError, ValueError):
    pass


class ParameterOutOfWindowError(PlateauLabError, ValueError):
    pass


class ConfigError(PlateauLabError, ValueError):
    pass
