"""Exception hierarchy shared across the package."""


class ShapingError(Exception):
    """Base class for all errors raised by sphereshape."""


class InvalidBoundError(ShapingError, ValueError):
    """Energy bound too small for even the all-ones sequence."""


class PrecisionConfigError(ShapingError, ValueError):
    """Bounded-precision parameters cannot represent the trellis."""


class CannotTrimError(ShapingError, ValueError):
    pass


class EmptyCodebookError(ShapingError, ValueError):
    pass


class IndexRangeError(ShapingError, ValueError):
    pass


class InvalidSequenceError(ShapingError, ValueError):
    """Sequence is not a member of the codebook it is decoded against."""


class InfeasibleError(ShapingError, ValueError):
    pass


class FitRangeError(ShapingError, ValueError):
    """Requested entropy/energy cannot be met by a Maxwell-Boltzmann PMF."""


class UnreachableRateError(ShapingError, ValueError):
    pass


class IntegrationError(ShapingError, RuntimeError):
    pass


class ConfigError(ShapingError, ValueError):
    pass
