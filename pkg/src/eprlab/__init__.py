"""Numerical laboratory for a two-particle + spin collision model on a line.

Builds the entangled two-packet initial state, evolves it with spectral
split-step propagators, evaluates the closed-form first-order collision
predictions, and verifies the quadratic spin-flip law and the spin /
particle-2 momentum correlation through epsilon sweeps.
"""

from .errors import (
    BoundaryMassError,
    ConfigError,
    DomainError,
    EprLabError,
    FitError,
    InvalidInputError,
    QuadratureError,
)
from .fields import ComplexField, Grid, SpinorField, StateTerm, TwoParticleState
from .model import (
    EnvelopeSpec,
    PhysParams,
    PotentialSpec,
    default_grid,
    gaussian_envelope,
    gaussian_potential,
    initial_state,
    normalization_constant,
    sample_wavepacket,
    zero_potential,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryMassError",
    "ComplexField",
    "ConfigError",
    "DomainError",
    "EnvelopeSpec",
    "EprLabError",
    "FitError",
    "Grid",
    "InvalidInputError",
    "PhysParams",
    "PotentialSpec",
    "QuadratureError",
    "SpinorField",
    "StateTerm",
    "TwoParticleState",
    "default_grid",
    "gaussian_envelope",
    "gaussian_potential",
    "initial_state",
    "normalization_constant",
    "sample_wavepacket",
    "zero_potential",
    "__version__",
]
