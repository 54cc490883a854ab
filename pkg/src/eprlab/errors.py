"""Exception types shared across the package."""


class EprLabError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(EprLabError):
    """Bad or missing configuration input."""


class InvalidInputError(EprLabError, ValueError):
    """An argument violates a documented precondition."""


class ResolutionError(EprLabError):
    """The grid cannot resolve the requested wavepacket or momentum."""


class DomainError(EprLabError, ValueError):
    """A parameter lies outside the range where the operation is defined."""


class QuadratureError(EprLabError):
    """Quadrature refinement failed to converge.

    Carries ``last_delta``, the relative distance between the final two
    refinement iterates.
    """

    def __init__(self, message: str, last_delta: float):
        super().__init__(f"{message} (last refinement delta {last_delta:.3e})")
        self.last_delta = last_delta


class BoundaryMassError(EprLabError):
    """Probability mass near the grid boundary exceeded the safe threshold."""


class FitError(EprLabError):
    """Not enough usable points for a power-law fit."""
