"""Physical parameters, wavepackets, and the entangled initial state.

Scaling conventions used throughout the package (masses are fixed to 1):

* ``hbar = epsilon^2``, spin frequency ``omega = 1/epsilon``, coupling
  ``epsilon^2``, interaction range ``epsilon``, packet width ``epsilon``.
* Wavepacket ``packet(x; K, X) = f(x/eps - X) exp(i K x / eps^2) / sqrt(eps)``
  with a real, even, L2-normalized envelope ``f``.
* Fourier transforms are unitary: ``Fhat(xi) = (2 pi)^{-1/2} int F(y) e^{-i y xi} dy``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import InvalidInputError, ResolutionError
from .fields import ComplexField, Grid, SpinorField, StateTerm, TwoParticleState

#: momentum half-width (in units of epsilon) assumed for packet spectra
PACKET_MOMENTUM_SPREAD = 6.0
#: default auto-grid: 16 sample points per carrier oscillation 2*pi*eps^2/P
POINTS_PER_OSCILLATION = 16
#: default auto-grid size cap; larger demands raise ResolutionError
MAX_GRID_POINTS = 8192


@dataclass(frozen=True)
class PhysParams:
    """Model constants: scale ``epsilon``, mean momentum, spin position, time."""

    epsilon: float
    momentum: float
    spin_pos: float
    t_final: float

    def __post_init__(self):
        for name in ("epsilon", "momentum", "spin_pos", "t_final"):
            if getattr(self, name) <= 0:
                raise InvalidInputError(f"{name} must be positive")

    @property
    def t_coll(self) -> float:
        """Classical arrival time of the right-moving packet at the spin."""
        return self.spin_pos / self.momentum

    @property
    def t_spin(self) -> float:
        """Period of the free spin precession."""
        return 2.0 * math.pi * self.epsilon

    @property
    def t_interaction(self) -> float:
        """Time for the packet to cross the interaction region."""
        return self.epsilon / self.momentum

    def with_epsilon(self, epsilon: float) -> "PhysParams":
        return PhysParams(epsilon, self.momentum, self.spin_pos, self.t_final)


@dataclass(frozen=True)
class EnvelopeSpec:
    """Packet envelope ``f`` with derivative and unitary Fourier transform.

    ``support_radius`` bounds where ``|f|`` falls below ~1e-14; evaluation
    outside is treated as zero in truncated quadratures.
    """

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    f_prime: Callable[[np.ndarray], np.ndarray]
    f_hat: Callable[[np.ndarray], np.ndarray]
    support_radius: float

    def __post_init__(self):
        sq, _ = quad(lambda y: self.f(y) ** 2, -np.inf, np.inf)
        if abs(sq - 1.0) > 1e-10:
            raise InvalidInputError(
                f"envelope '{self.name}' is not L2-normalized: ||f||^2 = {sq!r}"
            )


@dataclass(frozen=True)
class PotentialSpec:
    """Interaction shape ``v`` and its unitary Fourier transform ``v_hat``.

    ``xi_support`` bounds where ``|v_hat|`` falls below 1e-12; frequency
    integrals are truncated there.
    """

    name: str
    v: Callable[[np.ndarray], np.ndarray]
    v_hat: Callable[[np.ndarray], np.ndarray]
    xi_support: float
    sup_norm: float


def gaussian_envelope() -> EnvelopeSpec:
    """Normalized Gaussian envelope, self-dual under the unitary transform."""
    c = math.pi ** -0.25
    return EnvelopeSpec(
        name="gaussian",
        f=lambda y: c * np.exp(-np.asarray(y) ** 2 / 2.0),
        f_prime=lambda y: -np.asarray(y) * c * np.exp(-np.asarray(y) ** 2 / 2.0),
        f_hat=lambda k: c * np.exp(-np.asarray(k) ** 2 / 2.0),
        support_radius=math.sqrt(2.0 * math.log(1e14)),
    )


def gaussian_potential() -> PotentialSpec:
    return PotentialSpec(
        name="gaussian",
        v=lambda y: np.exp(-np.asarray(y) ** 2 / 2.0),
        v_hat=lambda xi: np.exp(-np.asarray(xi) ** 2 / 2.0),
        xi_support=math.sqrt(2.0 * math.log(1e12)),
        sup_norm=1.0,
    )


def zero_potential() -> PotentialSpec:
    return PotentialSpec(
        name="zero",
        v=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
        v_hat=lambda xi: np.zeros_like(np.asarray(xi, dtype=float)),
        xi_support=0.0,
        sup_norm=0.0,
    )


def numeric_potential(name: str, v: Callable, half_range: float = 50.0) -> PotentialSpec:
    """Wrap a rapidly decaying real potential, taking ``v_hat`` by quadrature.

    The transform is evaluated pointwise with relative tolerance 1e-8; prefer
    a closed form when one exists.
    """

    def v_hat_scalar(xi: float) -> complex:
        re, _ = quad(lambda y: v(y) * math.cos(y * xi), -half_range, half_range,
                     epsabs=1e-12, epsrel=1e-9, limit=400)
        im, _ = quad(lambda y: -v(y) * math.sin(y * xi), -half_range, half_range,
                     epsabs=1e-12, epsrel=1e-9, limit=400)
        return (re + 1j * im) / math.sqrt(2.0 * math.pi)

    v_hat = np.vectorize(v_hat_scalar)
    # scan outward for the 1e-12 cutoff of |v_hat|
    xi = 0.5
    while abs(v_hat_scalar(xi)) > 1e-12 and xi < 200.0:
        xi *= 1.5
    grid = np.linspace(0, xi, 400)
    vals = np.abs(v_hat(grid))
    above = np.nonzero(vals > 1e-12)[0]
    support = float(grid[above[-1] + 1]) if len(above) and above[-1] + 1 < len(grid) else xi
    sup = float(np.max(np.abs(v(np.linspace(-half_range, half_range, 20001)))))
    return PotentialSpec(name=name, v=v, v_hat=v_hat, xi_support=support, sup_norm=sup)


def required_dx(params: PhysParams, momentum: float) -> float:
    """Largest spacing whose scaled-momentum Nyquist covers the packet."""
    return params.epsilon**2 * math.pi / (
        abs(momentum) + PACKET_MOMENTUM_SPREAD * params.epsilon
    )


def check_resolution(grid: Grid, params: PhysParams, momentum: float) -> None:
    limit = required_dx(params, momentum)
    if grid.dx >= limit:
        raise ResolutionError(
            f"grid dx={grid.dx:.6g} cannot resolve a packet at scaled momentum "
            f"{momentum:g} with epsilon={params.epsilon:g}; need dx < {limit:.6g}"
        )


def default_grid(params: PhysParams, max_points: int = MAX_GRID_POINTS) -> Grid:
    """Auto-sized symmetric grid for the standard experiments.

    Spacing tracks the carrier wavelength (16 points per oscillation) and the
    half-length ``a + 6 P t`` keeps both packet branches away from the
    periodic boundary for the whole run.
    """
    dx = params.epsilon**2 * 2.0 * math.pi / (POINTS_PER_OSCILLATION * params.momentum)
    half = params.spin_pos + 6.0 * params.momentum * params.t_final
    n = 2
    while n * dx < 2.0 * half:
        n *= 2
        if n > max_points:
            raise ResolutionError(
                f"epsilon={params.epsilon:g} needs more than {max_points} points "
                f"(dx={dx:.3e}, domain half-length {half:g}); supply a grid "
                "explicitly or raise max_points"
            )
    grid = Grid(x_min=-0.5 * n * dx, dx=dx, n=n)
    check_resolution(grid, params, params.momentum)
    return grid


def envelope_overlap(params: PhysParams, envelope: EnvelopeSpec) -> float:
    """Overlap <packet(+P), packet(-P)> = int f(y)^2 cos(2 P y / eps) dy."""
    eps, p = params.epsilon, params.momentum
    val, _ = quad(
        lambda y: envelope.f(y) ** 2 * math.cos(2.0 * p * y / eps),
        -envelope.support_radius,
        envelope.support_radius,
        epsabs=1e-13,
        limit=400,
    )
    return float(val)


def normalization_constant(params: PhysParams, envelope: EnvelopeSpec) -> float:
    """Normalization factor ``(2 + 2 * overlap)^{-1/2}`` of the entangled pair.

    Always evaluated by quadrature; tends to ``1/sqrt(2)`` with a
    super-polynomially small correction as epsilon shrinks.
    """
    sq, _ = quad(lambda y: envelope.f(y) ** 2, -np.inf, np.inf)
    if abs(sq - 1.0) > 1e-8:
        raise InvalidInputError("envelope must be L2-normalized")
    value = (2.0 + 2.0 * envelope_overlap(params, envelope)) ** -0.5
    if not 0.0 < value < 1.0:
        raise InvalidInputError(f"normalization constant {value!r} out of range")
    return value


def state_normalizer(params: PhysParams, envelope: EnvelopeSpec) -> float:
    """Coefficient that makes the two-term entangled state exactly unit norm.

    The cross term of the symmetric combination enters squared, so the exact
    normalizer is ``(2 + 2 * overlap^2)^{-1/2}``; it differs from
    :func:`normalization_constant` only by a super-polynomially small amount.
    """
    c = envelope_overlap(params, envelope)
    return (2.0 + 2.0 * c * c) ** -0.5


def sample_wavepacket(
    grid: Grid,
    params: PhysParams,
    momentum: float,
    center_offset: float = 0.0,
    envelope: EnvelopeSpec | None = None,
) -> ComplexField:
    """Sample ``f(x/eps - X) exp(i K x / eps^2) / sqrt(eps)`` on the grid.

    ``momentum`` is the carrier K in scaled-momentum units; ``center_offset``
    is X, the envelope center in units of epsilon.
    """
    envelope = envelope or gaussian_envelope()
    check_resolution(grid, params, momentum)
    eps = params.epsilon
    y = grid.x / eps - center_offset
    values = envelope.f(y) * np.exp(1j * momentum * grid.x / eps**2) / math.sqrt(eps)
    return ComplexField(grid, values)


def initial_state(
    grid: Grid, params: PhysParams, envelope: EnvelopeSpec | None = None
) -> TwoParticleState:
    """Spin-down maximally entangled pair of counter-propagating packets.

    Two tensor-product terms exchanging the momentum labels +P / -P, each with
    the exact normalizing coefficient; upper spin components are zero.
    """
    envelope = envelope or gaussian_envelope()
    p = params.momentum
    plus = sample_wavepacket(grid, params, p, envelope=envelope)
    minus = sample_wavepacket(grid, params, -p, envelope=envelope)
    coeff = state_normalizer(params, envelope)
    return TwoParticleState(
        [
            StateTerm(SpinorField.from_down(plus), minus, coeff),
            StateTerm(SpinorField.from_down(minus), plus, coeff),
        ]
    )
