"""Slow brute-force references trusted as ground truth by tests and the
``validate`` command.

These deliberately avoid the fast paths: the free propagator is evaluated by
direct quadrature of its integral kernel (O(n^2)), and the two independent
routes to the collision operator are compared as a measured number.  Oracle
inputs are capped at 2048 grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .fields import ComplexField, Grid
from .model import (
    EnvelopeSpec,
    PhysParams,
    PotentialSpec,
    gaussian_envelope,
    gaussian_potential,
    sample_wavepacket,
)
from .duhamel import collision_operator_reduced, collision_operator_spectral
from .spectral import free_propagate

ORACLE_MAX_POINTS = 2048


def kernel_propagate(field: ComplexField, t: float, params: PhysParams) -> ComplexField:
    """Free propagation by direct quadrature of the spreading kernel.

    Evaluates ``(2 pi i eps^2 t)^{-1/2} int exp(i (x-y)^2 / (2 eps^2 t)) f(y) dy``
    at every grid point with the plain Riemann sum (principal branch of the
    square root).  Requires the field to be compactly supported on the grid.
    """
    grid = field.grid
    if grid.n > ORACLE_MAX_POINTS:
        raise InvalidInputError(
            f"kernel oracle is limited to {ORACLE_MAX_POINTS} points, got {grid.n}"
        )
    if field.boundary_mass() > 1e-10:
        raise InvalidInputError(
            "kernel oracle needs a compactly supported field (boundary mass "
            f"{field.boundary_mass():.2e} > 1e-10)"
        )
    if t == 0.0:
        return field
    eps2t = params.epsilon**2 * t
    x = grid.x
    kernel = np.exp(1j * (x[:, None] - x[None, :]) ** 2 / (2.0 * eps2t))
    values = kernel @ field.values * grid.dx / np.sqrt(2j * math.pi * eps2t)
    return ComplexField(grid, values)


@dataclass(frozen=True)
class AgreementResult:
    """Relative distance between the two collision-operator routes."""

    value: float
    zero_potential: bool


def collision_operator_agreement(
    t: float,
    grid: Grid,
    params: PhysParams,
    potential: PotentialSpec | None = None,
    envelope: EnvelopeSpec | None = None,
    tol: float = 1e-6,
) -> AgreementResult:
    """Measure ``||spectral - reduced|| / ||reduced||`` on the +P packet.

    The two routes discretize the same operator through unrelated machinery,
    so a small value validates both.  A vanishing potential makes the ratio
    0/0; that case returns 0 with a flag.
    """
    if grid.n > ORACLE_MAX_POINTS:
        raise InvalidInputError(
            f"oracle comparisons are limited to {ORACLE_MAX_POINTS} points, got {grid.n}"
        )
    potential = potential or gaussian_potential()
    envelope = envelope or gaussian_envelope()
    packet = sample_wavepacket(grid, params, params.momentum, envelope=envelope)
    spectral = collision_operator_spectral(packet, t, params, potential, tol=tol)
    reduced = collision_operator_reduced(
        t, params.momentum, 0.0, grid, params, potential, envelope, tol=tol
    )
    ref = reduced.norm()
    if ref == 0.0:
        return AgreementResult(value=0.0, zero_potential=True)
    return AgreementResult(value=spectral.distance(reduced) / ref, zero_potential=False)


def run_validation(
    grid: Grid,
    params: PhysParams,
    potential: PotentialSpec | None = None,
    envelope: EnvelopeSpec | None = None,
) -> dict:
    """Full oracle suite; returns one pass/fail entry per check."""
    envelope = envelope or gaussian_envelope()
    potential = potential or gaussian_potential()
    packet = sample_wavepacket(grid, params, params.momentum, envelope=envelope)
    checks = []

    def record(name: str, value: float, threshold: float):
        checks.append(
            {
                "name": name,
                "value": value,
                "threshold": threshold,
                "passed": bool(value < threshold),
            }
        )

    propagated = kernel_propagate(packet, 1.0, params)
    fast = free_propagate(packet, 1.0, params)
    record(
        "kernel_vs_spectral_relative_l2",
        propagated.distance(fast) / fast.norm(),
        1e-6,
    )
    record("kernel_norm_drift", abs(propagated.norm() - packet.norm()), 1e-6)
    roundtrip = kernel_propagate(propagated, -1.0, params)
    record("kernel_roundtrip_error", roundtrip.distance(packet), 1e-5)
    agreement = collision_operator_agreement(
        params.t_final, grid, params, potential, envelope
    )
    record("collision_operator_agreement", agreement.value, 1e-3)
    return {"checks": checks, "passed": all(c["passed"] for c in checks)}
