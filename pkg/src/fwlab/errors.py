"""Exception types shared across the package."""


class FWLabError(Exception):
    """Base class for all errors raised by fwlab."""


class GridMismatchError(FWLabError, ValueError):
    """Two objects live on different grids."""


class NonFiniteError(FWLabError, ValueError):
    """A field or multiplier contains NaN or Inf."""


class TailToleranceError(FWLabError, ValueError):
    """Data are not small enough at the box boundary for periodization to be harmless."""


class InsufficientSamplesError(FWLabError, ValueError):
    pass


class BeyondLifespanError(FWLabError, ValueError):
    """A Burgers evaluation was requested at or after the breaking time."""


class ConvergenceError(FWLabError, RuntimeError):
    pass
