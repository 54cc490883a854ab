"""First-order collision analysis: the time-ordered collision operator, its
stationary-phase closed form, and quadrature bounds on the remainder pieces.

The collision operator acting on a packet with carrier momentum K reduces to
a two-dimensional oscillatory integral over interaction time ``tau`` and
potential frequency ``xi`` whose phase ``tau - a xi + K tau xi`` is
stationary at ``(a/K, -1/K)``.  Evaluating the amplitude there yields the
closed-form flipped-spin wavepacket carrying momentum ``P - eps/P``; the rest
of the integral shrinks quadratically with epsilon, which the sweep module
measures empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, QuadratureError
from .fields import ComplexField, Grid, SpinorField, StateTerm, TwoParticleState
from .model import (
    EnvelopeSpec,
    PhysParams,
    PotentialSpec,
    check_resolution,
    gaussian_envelope,
    gaussian_potential,
    sample_wavepacket,
    state_normalizer,
)
from .quadrature import gauss_panel_rule, panels_for_phase
from .spectral import evolve_interacting, free_propagate, kinetic_phase

#: relative L2 self-consistency demanded of refined quadratures
QUAD_TOL = 1e-6
MAX_REFINEMENTS = 6


@dataclass(frozen=True)
class CriticalPoint:
    """Stationary point of the collision phase for carrier momentum K."""

    spin_pos: float
    momentum: float

    @property
    def tau_c(self) -> float:
        return self.spin_pos / self.momentum

    @property
    def xi_c(self) -> float:
        return -1.0 / self.momentum

    def phase(self, tau, xi):
        """Collision phase tau - a*xi + K*tau*xi (in units of 1/eps)."""
        return tau - self.spin_pos * xi + self.momentum * tau * xi

    def phase_factored(self, tau, xi):
        """Identical phase written around the critical point."""
        return self.tau_c + self.momentum * (tau - self.tau_c) * (xi - self.xi_c)


def _refine(evaluate, tol: float, what: str):
    """Run ``evaluate(level)`` with doubling resolution until two successive
    results agree to ``tol`` in relative L2."""
    prev = evaluate(0)
    delta = math.inf
    for level in range(1, MAX_REFINEMENTS + 1):
        cur = evaluate(level)
        scale = np.sqrt(np.sum(np.abs(cur) ** 2))
        if scale == 0.0:
            return cur
        delta = np.sqrt(np.sum(np.abs(cur - prev) ** 2)) / scale
        if delta < tol:
            return cur
        prev = cur
    raise QuadratureError(f"{what} did not converge to {tol:g}", last_delta=delta)


def collision_operator_spectral(
    field: ComplexField,
    t: float,
    params: PhysParams,
    potential: PotentialSpec | None = None,
    tol: float = QUAD_TOL,
) -> ComplexField:
    """Collision operator as a time-ordered propagator sandwich.

    Integrates ``exp(i tau/eps) U0(-tau) V((x-a)/eps) U0(tau) field`` over
    ``tau`` in [0, t] with Gauss-Legendre panels, each node costing one FFT
    round trip.  Serves as the independent cross-check for
    :func:`collision_operator_reduced`.
    """
    if t <= 0:
        raise DomainError("integration time must be positive")
    potential = potential or gaussian_potential()
    grid = field.grid
    eps = params.epsilon
    if potential.sup_norm == 0.0:
        return ComplexField.zeros(grid)
    v = np.asarray(potential.v((grid.x - params.spin_pos) / eps), dtype=float)
    f_hat0 = np.fft.fft(field.values)
    # worst-case phase rate of the integrand over the packet's frequency band
    xi_max = potential.xi_support
    rate = (1.0 + abs(params.momentum) * xi_max) / eps + 0.5 * xi_max**2
    base_panels = panels_for_phase(rate * t)

    def evaluate(level: int) -> np.ndarray:
        taus, weights = gauss_panel_rule(0.0, t, base_panels * 2**level)
        acc = np.zeros(grid.n, dtype=np.complex128)
        for tau, w in zip(taus, weights):
            kin = kinetic_phase(grid, params, tau)
            psi = np.fft.ifft(kin * f_hat0)
            acc += (w * np.exp(1j * tau / eps) * np.conj(kin)) * np.fft.fft(v * psi)
        return np.fft.ifft(acc)

    values = _refine(evaluate, tol, "collision operator (spectral route)")
    return ComplexField(grid, values)


def collision_operator_reduced(
    t: float,
    momentum: float,
    center_offset: float,
    grid: Grid,
    params: PhysParams,
    potential: PotentialSpec | None = None,
    envelope: EnvelopeSpec | None = None,
    tol: float = QUAD_TOL,
) -> ComplexField:
    """Collision operator via direct 2D quadrature of its reduced integral.

    For the packet with carrier ``momentum`` K and envelope center
    ``center_offset`` X, evaluates at every grid point x

        exp(i K x/eps^2)/sqrt(2 pi eps) *
        int_0^t dtau int dxi  Vhat(xi) f(tau xi + x/eps - X)
            * exp(i (tau xi^2/2 + x xi/eps))
            * exp(i (tau - a xi + K tau xi)/eps)

    with the xi range truncated where ``|Vhat| < 1e-12``.  Gauss-Legendre
    panels on both axes are doubled until successive results differ by less
    than ``tol`` in relative L2.
    """
    if t <= 0:
        raise DomainError("integration time must be positive")
    potential = potential or gaussian_potential()
    envelope = envelope or gaussian_envelope()
    eps = params.epsilon
    a = params.spin_pos
    if potential.xi_support == 0.0:
        return ComplexField.zeros(grid)

    xi_max = potential.xi_support
    # grid points where the translated envelope can be nonzero for some (tau, xi)
    reach = envelope.support_radius + t * xi_max
    sub = np.abs(grid.x / eps - center_offset) <= reach
    x_sub = grid.x[sub]
    if x_sub.size == 0:
        return ComplexField.zeros(grid)

    rate_tau = (1.0 + abs(momentum) * xi_max) / eps + 0.5 * xi_max**2
    rate_xi = (np.max(np.abs(x_sub)) + a + abs(momentum) * t) / eps + t * xi_max
    base_tau = panels_for_phase(rate_tau * t)
    base_xi = panels_for_phase(rate_xi * 2.0 * xi_max)

    def evaluate(level: int) -> np.ndarray:
        taus, w_tau = gauss_panel_rule(0.0, t, base_tau * 2**level)
        xis, w_xi = gauss_panel_rule(-xi_max, xi_max, base_xi * 2**level)
        osc = np.exp(1j * np.outer(xis, x_sub) / eps)  # shared across tau nodes
        vhat_w = w_xi * np.asarray(potential.v_hat(xis), dtype=np.complex128)
        vhat_w = vhat_w * np.exp(-1j * a * xis / eps)
        acc = np.zeros(x_sub.size, dtype=np.complex128)
        for tau, w in zip(taus, w_tau):
            coeff = (
                w
                * vhat_w
                * np.exp(1j * (0.5 * tau * xis**2 + tau * (1.0 + momentum * xis) / eps))
            )
            env = envelope.f(tau * xis[:, None] + (x_sub / eps - center_offset)[None, :])
            acc += coeff @ (env * osc)
        return acc

    inner = _refine(evaluate, tol, "collision operator (reduced route)")
    values = np.zeros(grid.n, dtype=np.complex128)
    values[sub] = (
        np.exp(1j * momentum * x_sub / eps**2) / math.sqrt(2.0 * math.pi * eps)
    ) * inner
    return ComplexField(grid, values)


def flip_wavepacket(
    grid: Grid,
    params: PhysParams,
    potential: PotentialSpec | None = None,
    envelope: EnvelopeSpec | None = None,
) -> ComplexField:
    """Closed-form leading-order flipped-spin wavepacket.

    A packet of norm ``sqrt(2 pi)/P * |Vhat(1/P)|`` centered at
    ``a eps / P^2`` with carrier momentum ``P - eps/P``.
    """
    potential = potential or gaussian_potential()
    envelope = envelope or gaussian_envelope()
    eps, p, a = params.epsilon, params.momentum, params.spin_pos
    carrier = p - eps / p
    check_resolution(grid, params, carrier)
    amp = (
        -(math.sqrt(2.0 * math.pi) / p)
        * np.exp(1j * (a / (eps * p)) * (1.0 + eps / (2.0 * p**2)))
        * np.conj(complex(potential.v_hat(1.0 / p)))
        / math.sqrt(eps)
    )
    values = (
        amp
        * envelope.f((grid.x - a * eps / p**2) / eps)
        * np.exp(1j * carrier * grid.x / eps**2)
    )
    return ComplexField(grid, values)


def stationary_phase_residual(
    t: float,
    grid: Grid,
    params: PhysParams,
    potential: PotentialSpec | None = None,
    envelope: EnvelopeSpec | None = None,
    tol: float = QUAD_TOL,
) -> float:
    """Norm of the collision integral minus its stationary-phase leading term.

    Defined only for ``t > t_coll`` (the stationary point must lie inside the
    integration range); shrinks like epsilon^2.
    """
    if t <= params.t_coll:
        raise DomainError(
            f"t={t:g} must exceed the collision time {params.t_coll:g}; the "
            "leading-order form is undefined before the stationary point enters"
        )
    reduced = collision_operator_reduced(
        t, params.momentum, 0.0, grid, params, potential, envelope, tol
    )
    lead = flip_wavepacket(grid, params, potential, envelope)
    return reduced.add(lead.scaled(params.epsilon)).norm()


@dataclass(frozen=True)
class FirstOrderPrediction:
    """Closed-form first-order description of the post-collision state."""

    flip_field: ComplexField
    flip_norm: float
    alpha: float
    first_order_term: TwoParticleState
    approximation: TwoParticleState


def first_order_state(
    grid: Grid,
    params: PhysParams,
    t: float,
    envelope: EnvelopeSpec | None = None,
    potential: PotentialSpec | None = None,
) -> FirstOrderPrediction:
    """Assemble the first-order approximation of the evolved state at time t.

    The correction term puts the flipped packet on particle 1 (upper spin
    only) with the unperturbed left-mover on particle 2; the approximation is
    the freely evolved initial state plus epsilon times the evolved
    correction, three tensor terms in total.
    """
    envelope = envelope or gaussian_envelope()
    potential = potential or gaussian_potential()
    eps, p = params.epsilon, params.momentum
    coeff = state_normalizer(params, envelope)
    spin_phase = t / (2.0 * eps)

    flip = flip_wavepacket(grid, params, potential, envelope)
    plus = sample_wavepacket(grid, params, p, envelope=envelope)
    minus = sample_wavepacket(grid, params, -p, envelope=envelope)

    first_order_term = TwoParticleState(
        [StateTerm(SpinorField(up=flip, down=ComplexField.zeros(grid)), minus, coeff)]
    )

    u_plus = free_propagate(plus, t, params).scaled(np.exp(1j * spin_phase))
    u_minus = free_propagate(minus, t, params).scaled(np.exp(1j * spin_phase))
    u_flip = free_propagate(flip, t, params).scaled(np.exp(-1j * spin_phase))
    p2_minus = free_propagate(minus, t, params)
    p2_plus = free_propagate(plus, t, params)
    approximation = TwoParticleState(
        [
            StateTerm(SpinorField.from_down(u_plus), p2_minus, coeff),
            StateTerm(SpinorField.from_down(u_minus), p2_plus, coeff),
            StateTerm(
                SpinorField(up=u_flip, down=ComplexField.zeros(grid)),
                p2_minus,
                eps * coeff,
            ),
        ]
    )
    alpha = math.pi / p**2 * abs(complex(potential.v_hat(1.0 / p))) ** 2
    return FirstOrderPrediction(
        flip_field=flip,
        flip_norm=flip.norm(),
        alpha=alpha,
        first_order_term=first_order_term,
        approximation=approximation,
    )


def first_order_remainder(
    grid: Grid,
    params: PhysParams,
    t: float,
    dt: float,
    envelope: EnvelopeSpec | None = None,
    potential: PotentialSpec | None = None,
) -> float:
    """Distance between the interacting evolution of the right-mover branch
    and its closed-form first-order prediction; shrinks like epsilon^2."""
    envelope = envelope or gaussian_envelope()
    potential = potential or gaussian_potential()
    eps = params.epsilon
    plus = sample_wavepacket(grid, params, params.momentum, envelope=envelope)
    evolved = evolve_interacting(SpinorField.from_down(plus), t, dt, params, potential)

    spin_phase = t / (2.0 * eps)
    flip = flip_wavepacket(grid, params, potential, envelope)
    predicted = SpinorField(
        up=free_propagate(flip, t, params).scaled(eps * np.exp(-1j * spin_phase)),
        down=free_propagate(plus, t, params).scaled(np.exp(1j * spin_phase)),
    )
    return evolved.distance(predicted)


def far_branch_bound(
    t: float,
    grid: Grid,
    params: PhysParams,
    potential: PotentialSpec | None = None,
    envelope: EnvelopeSpec | None = None,
    tol: float = 1e-8,
) -> float:
    """Quadrature bound on the interaction felt by the left-moving branch.

    Integrates ``||V((x-a)/eps) U0(tau) packet(-P)||`` over tau in [0, t];
    the potential sits at ``a > 0`` while the packet retreats, so the bound
    decays faster than any power of epsilon.
    """
    potential = potential or gaussian_potential()
    envelope = envelope or gaussian_envelope()
    eps = params.epsilon
    minus = sample_wavepacket(grid, params, -params.momentum, envelope=envelope)
    v = np.asarray(potential.v((grid.x - params.spin_pos) / eps), dtype=float)
    f_hat0 = np.fft.fft(minus.values)
    root_dx = math.sqrt(grid.dx)

    def integrand(tau: float) -> float:
        psi = np.fft.ifft(kinetic_phase(grid, params, tau) * f_hat0)
        return root_dx * float(np.linalg.norm(v * psi))

    def evaluate(level: int) -> np.ndarray:
        m = 64 * 2**level
        taus = np.linspace(0.0, t, m + 1)
        vals = np.array([integrand(tau) for tau in taus])
        h = t / m
        # composite Simpson
        total = vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-1:2].sum()
        return np.array([total * h / 3.0])

    prev = evaluate(0)
    for level in range(1, MAX_REFINEMENTS + 1):
        cur = evaluate(level)
        if abs(cur[0] - prev[0]) <= max(tol * abs(cur[0]), 1e-15):
            return float(cur[0])
        prev = cur
    raise QuadratureError(
        "far-branch bound quadrature did not converge",
        last_delta=float(abs(cur[0] - prev[0])),
    )
