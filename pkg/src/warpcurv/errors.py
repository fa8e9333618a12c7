"""Exception types shared across warpcurv."""


class WarpcurvError(Exception):
    """Base class for all library errors."""


class ValidationError(WarpcurvError, ValueError):
    """An input object violates one of its invariants."""


class SegmentationError(ValidationError):
    """Segments of a piecewise function are not contiguous / ordered."""


class ArityMismatch(ValidationError):
    pass


class DomainError(WarpcurvError, ValueError):
    """Evaluation point lies outside the open domain."""


class AmbiguousPoint(WarpcurvError, ValueError):
    """Point evaluation requested where the function is two-valued."""


class UnsupportedDistribution(WarpcurvError):
    """Operation would need delta derivatives or products of deltas."""


class QuadratureFailure(WarpcurvError, RuntimeError):
    pass


class DegeneratePlane(WarpcurvError, ValueError):
    pass


class DegenerateFit(WarpcurvError, ValueError):
    pass


class SameFiber(WarpcurvError, ValueError):
    pass


class MissingFiberRicci(WarpcurvError, ValueError):
    pass


class BreakpointQuery(WarpcurvError, ValueError):
    """The brute-force oracle was queried exactly at a breakpoint."""


class GridTooCoarse(ValidationError):
    pass


class ParseError(ValidationError):
    """Scenario text is not well-formed; the message carries line and column."""


class ScenarioIOError(WarpcurvError, OSError):
    """Reading a scenario or writing an output file failed."""


class ComputationError(WarpcurvError, RuntimeError):
    """A library computation failed while running a scenario."""
