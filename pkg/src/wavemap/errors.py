"""Exception hierarchy shared by all wavemap modules."""


class WavemapError(Exception):
    """Base class for every error raised by this package."""


class UnknownChart(WavemapError, LookupError):
    pass


class NearBoundary(WavemapError, ValueError):
    pass


class BaseMismatch(WavemapError, ValueError):
    pass


class ChartDomainExceeded(WavemapError):
    """A point left the chart domain.

    When raised by the solver, ``state`` holds the last good state and ``t``
    the time at which the failure was detected. ``run`` additionally attaches
    the frames recorded before the failure as ``frames``.
    """

    def __init__(self, message, state=None, t=None):
        super().__init__(message)
        self.state = state
        self.t = t
        self.frames = None


class NonFinite(ChartDomainExceeded):
    """NaN or infinity detected in the solution."""


class OutOfRange(WavemapError, ValueError):
    pass


class NonMonotoneMass(WavemapError, ValueError):
    pass


class UnknownModel(WavemapError, LookupError):
    pass


class NoPeriodFound(WavemapError):
    pass


class UnknownScenario(WavemapError, LookupError):
    pass


class ParseError(WavemapError, ValueError):
    pass


class SchemaError(WavemapError, ValueError):
    pass


class ValidationError(WavemapError, ValueError):
    pass
