"""Exception types shared across the package."""


class ConfinedLevyError(Exception):
    """Base class for all package-specific errors."""


class GridTooNarrowError(ConfinedLevyError):
    """The requested grid cannot represent the density accurately enough."""


class NonConvergenceError(ConfinedLevyError):
    """An iterative solver or optimizer failed to converge."""


class EmptyTrajectoryError(ConfinedLevyError):
    """Simulation configuration keeps zero points."""


class InsufficientTailError(ConfinedLevyError):
    """Too few samples above the cutoff for a tail fit."""


class DegenerateSampleError(ConfinedLevyError):
    """Sample has no usable spread (all values equal, or similar)."""


class SeriesTooShortError(ConfinedLevyError):
    """Time series is too short for the requested transform."""


class GdpParseError(ConfinedLevyError):
    """Malformed GDP input file.

    Carries the 1-based line number of the offending row when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FitFailureError(ConfinedLevyError):
    """Maximum-likelihood fit failed on all starts, or too many refits failed."""
