"""Exception hierarchy shared by all modules."""


class PolyDensityError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(PolyDensityError, ValueError):
    pass


class IntervalOutOfRange(PolyDensityError, ValueError):
    pass


class DomainMismatch(PolyDensityError, ValueError):
    pass


class NotADistribution(PolyDensityError, ValueError):
    pass


class WeightsInvalid(PolyDensityError, ValueError):
    pass


class QuadratureNonConvergence(PolyDensityError, RuntimeError):
    pass


class EmptySample(PolyDensityError, ValueError):
    pass


class ExcludedMassTooLarge(PolyDensityError, RuntimeError):
    pass


class TargetDegenerate(PolyDensityError, RuntimeError):
    pass


class PreconditionViolated(PolyDensityError, ValueError):
    pass


class LpInfeasible(PolyDensityError, RuntimeError):
    pass


class LpIterationLimit(PolyDensityError, RuntimeError):
    pass


class TooLargeForOracle(PolyDensityError, ValueError):
    pass


class NotLogConcaveDetected(PolyDensityError, ValueError):
    pass


class ValidationFailed(PolyDensityError, ValueError):
    pass
