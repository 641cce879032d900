"""Exception types shared across the package."""


class PrivlinkError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(PrivlinkError, ValueError):
    """Shapes or lengths of inputs are inconsistent."""


class ParameterError(PrivlinkError, ValueError):
    """A scalar parameter is outside its admissible range."""


class InfeasibleError(PrivlinkError, ValueError):
    """No solution exists for the requested constraint (e.g. target MSE floor)."""


class RegimeError(PrivlinkError, ValueError):
    """A bound is vacuous in the requested parameter regime."""


class DegenerateError(PrivlinkError, ValueError):
    """The problem instance is degenerate (e.g. zero signal-norm bound)."""
