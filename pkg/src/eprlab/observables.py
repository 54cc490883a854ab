"""Born-rule measurements on fields and two-particle states.

Momentum statements use the scaled momentum ``p = eps^2 k`` so that a packet
with carrier K has mean scaled momentum K.  "Momentum near -P" is
operationalized as a sharp half-open window ``[center - hw, center + hw)`` in
the discrete spectrum; the packet spread is O(eps), so any half-width well
above eps and below P gives the same answer to all orders.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInputError
from .fields import ComplexField, TwoParticleState, require_low_boundary_mass
from .model import PhysParams, PotentialSpec, gaussian_potential

#: tolerated departure from unit norm before measurements warn
NORM_WARN_TOL = 1e-4


@dataclass(frozen=True)
class MomentumWindow:
    """Half-open scaled-momentum window [center - half_width, center + half_width)."""

    center: float
    half_width: float

    def __post_init__(self):
        if self.half_width <= 0:
            raise InvalidInputError("window half_width must be positive")

    def mask(self, p: np.ndarray) -> np.ndarray:
        return (p >= self.center - self.half_width) & (p < self.center + self.half_width)


def default_window(params: PhysParams) -> MomentumWindow:
    """Window of half-width P/2 centered on -P (the left-mover)."""
    return MomentumWindow(center=-params.momentum, half_width=params.momentum / 2.0)


def spin_flip_coefficient(params: PhysParams, potential: PotentialSpec | None = None) -> float:
    """Prefactor of the quadratic spin-flip law: pi / P^2 * |Vhat(1/P)|^2."""
    potential = potential or gaussian_potential()
    p = params.momentum
    return math.pi / p**2 * abs(complex(potential.v_hat(1.0 / p))) ** 2


def _warn_if_unnormalized(state: TwoParticleState, what: str) -> None:
    norm = state.norm()
    if abs(norm - 1.0) > NORM_WARN_TOL:
        warnings.warn(
            f"{what}: state norm {norm:.6f} differs from 1; returning raw value",
            stacklevel=3,
        )


def spin_up_probability(state: TwoParticleState) -> float:
    """Squared norm of the upper spin block, interference terms included."""
    _warn_if_unnormalized(state, "spin_up_probability")
    return state.component_norm_sq("up")


def spin_down_probability(state: TwoParticleState) -> float:
    _warn_if_unnormalized(state, "spin_down_probability")
    return state.component_norm_sq("down")


def joint_momentum_spin_probability(
    state: TwoParticleState,
    window: MomentumWindow,
    spin: str,
    params: PhysParams,
) -> float:
    """Probability of finding particle 2 inside ``window`` with the given spin.

    Projects every particle-2 factor onto the window (sharp cutoff in the
    discrete spectrum) and contracts the Gram matrices of both factors, so
    cross terms between tensor terms are kept.
    """
    if spin not in ("up", "down"):
        raise InvalidInputError("spin must be 'up' or 'down'")
    _warn_if_unnormalized(state, "joint_momentum_spin_probability")
    grid = state.grid2
    p = grid.scaled_momenta(params.epsilon)
    nyq = grid.nyquist_scaled_momentum(params.epsilon)
    if abs(window.center) + window.half_width > nyq:
        raise DomainError(
            f"window [{window.center - window.half_width:g}, "
            f"{window.center + window.half_width:g}) exceeds the Nyquist range "
            f"+-{nyq:g} of this grid"
        )
    mask = window.mask(p)
    weight = grid.dx / grid.n  # Parseval factor for numpy's unnormalized FFT
    spectra = [np.fft.fft(t.particle2.values) for t in state.terms]
    m = len(spectra)
    gram2 = np.empty((m, m), dtype=np.complex128)
    for i in range(m):
        for j in range(m):
            gram2[i, j] = weight * np.vdot(spectra[i][mask], spectra[j][mask])
    c = state.coefficients()
    val = np.einsum("i,j,ij,ij->", np.conj(c), c, state.spin_gram(spin), gram2)
    return float(val.real)


def scaled_momentum_expectation(field: ComplexField, params: PhysParams) -> float:
    """Mean scaled momentum sum(p |psi_hat|^2) / sum(|psi_hat|^2)."""
    spectrum = np.abs(np.fft.fft(field.values)) ** 2
    p = field.grid.scaled_momenta(params.epsilon)
    return float(np.sum(p * spectrum) / np.sum(spectrum))


def position_expectation(field: ComplexField) -> float:
    """Mean position by grid quadrature; refuses fields leaking off the grid."""
    require_low_boundary_mass(field.boundary_mass(), "position_expectation")
    dens = np.abs(field.values) ** 2
    return float(np.sum(field.grid.x * dens) / np.sum(dens))


def conditional_momentum_mass(
    state: TwoParticleState,
    window: MomentumWindow,
    spin: str,
    params: PhysParams,
) -> float:
    """Fraction of the particle-2 momentum distribution inside ``window``,
    conditioned on the spin outcome."""
    marginal = state.component_norm_sq(spin)
    if marginal == 0.0:
        raise DomainError(f"conditioning on spin '{spin}' with zero probability")
    return joint_momentum_spin_probability(state, window, spin, params) / marginal


def _conditional_particle1_expectation(
    state: TwoParticleState, spin: str, values_op
) -> float:
    """Gram-contracted expectation of a particle-1 operator given the spin.

    ``values_op(field) -> ndarray`` maps a component to the operator applied
    to its samples in position space.
    """
    comps = [t.particle1.up if spin == "up" else t.particle1.down for t in state.terms]
    applied = [values_op(f) for f in comps]
    c = state.coefficients()
    gram2 = state.particle2_gram()
    dx = state.grid1.dx
    num = 0.0 + 0.0j
    den = 0.0 + 0.0j
    for i in range(len(comps)):
        for j in range(len(comps)):
            w = np.conj(c[i]) * c[j] * gram2[i, j]
            num += w * dx * np.vdot(comps[i].values, applied[j])
            den += w * comps[i].inner(comps[j])
    if abs(den) == 0.0:
        raise DomainError(f"conditioning on spin '{spin}' with zero probability")
    return float((num / den).real)


def conditional_position_expectation(state: TwoParticleState, spin: str) -> float:
    x = state.grid1.x
    return _conditional_particle1_expectation(state, spin, lambda f: x * f.values)


def conditional_momentum_expectation(
    state: TwoParticleState, spin: str, params: PhysParams
) -> float:
    grid = state.grid1
    p = grid.scaled_momenta(params.epsilon)

    def apply_p(f: ComplexField) -> np.ndarray:
        return np.fft.ifft(p * np.fft.fft(f.values))

    return _conditional_particle1_expectation(state, spin, apply_p)


def measurement_record(
    state: TwoParticleState,
    params: PhysParams,
    window: MomentumWindow | None = None,
) -> dict:
    """All headline measurements of one evolved state as a flat dict."""
    window = window or default_window(params)
    p_u = spin_up_probability(state)
    p_d = spin_down_probability(state)
    p_minus_u = joint_momentum_spin_probability(state, window, "up", params)
    p_minus_d = joint_momentum_spin_probability(state, window, "down", params)
    return {
        "P_u": p_u,
        "P_d": p_d,
        "P_minus_u": p_minus_u,
        "P_minus_d": p_minus_d,
        "ratio_u": p_minus_u / p_u if p_u > 0 else math.nan,
        "ratio_d": p_minus_d / p_d if p_d > 0 else math.nan,
        "mean_p1_up": conditional_momentum_expectation(state, "up", params),
        "mean_x1_up": conditional_position_expectation(state, "up"),
        "window": {"center": window.center, "half_width": window.half_width},
    }
