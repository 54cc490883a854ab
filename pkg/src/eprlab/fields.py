"""Uniform grids and the complex field containers used by every solver stage.

All containers are immutable after construction: operations return new
objects and sample arrays are marked read-only, so instances can be shared
freely across threads.

Discrete L2 convention: ``||psi||^2 = dx * sum |psi_j|^2``, the trapezoid-free
Riemann sum, which is spectrally accurate for the smooth, well-decayed fields
this package produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import BoundaryMassError, InvalidInputError

#: fraction of points, on each side, counted as "near the boundary"
BOUNDARY_FRACTION = 1.0 / 32.0
#: wrap-around mass above this aborts an evolution
BOUNDARY_MASS_LIMIT = 1e-8


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Uniform 1D position grid with ``n`` points starting at ``x_min``."""

    x_min: float
    dx: float
    n: int

    def __post_init__(self):
        if self.dx <= 0:
            raise InvalidInputError("grid spacing dx must be positive")
        if self.n < 2 or (self.n & (self.n - 1)) != 0:
            raise InvalidInputError(f"grid size n={self.n} must be a power of two >= 2")

    @cached_property
    def x(self) -> np.ndarray:
        return _frozen_array(self.x_min + self.dx * np.arange(self.n), float)

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers matching ``numpy.fft.fft`` ordering."""
        return _frozen_array(2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx), float)

    @property
    def length(self) -> float:
        return self.n * self.dx

    @property
    def x_max(self) -> float:
        return self.x_min + self.length

    def scaled_momenta(self, epsilon: float) -> np.ndarray:
        """Scaled momentum p = epsilon^2 * k for each FFT mode."""
        return epsilon**2 * self.k

    def nyquist_scaled_momentum(self, epsilon: float) -> float:
        return epsilon**2 * np.pi / self.dx

    @staticmethod
    def symmetric(half_length: float, dx: float) -> "Grid":
        """Smallest power-of-two grid covering [-half_length, half_length]."""
        n = 2
        while n * dx < 2.0 * half_length:
            n *= 2
        return Grid(x_min=-0.5 * n * dx, dx=dx, n=n)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "dx": self.dx, "n": self.n}

    @staticmethod
    def from_dict(d: dict) -> "Grid":
        return Grid(x_min=float(d["x_min"]), dx=float(d["dx"]), n=int(d["n"]))


@dataclass(frozen=True)
class ComplexField:
    """Complex-valued function sampled on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values, np.complex128)
        if arr.shape != (self.grid.n,):
            raise InvalidInputError(
                f"field has {arr.shape} samples, grid expects ({self.grid.n},)"
            )
        object.__setattr__(self, "values", arr)

    @staticmethod
    def zeros(grid: Grid) -> "ComplexField":
        return ComplexField(grid, np.zeros(grid.n, dtype=np.complex128))

    def norm(self) -> float:
        return float(np.sqrt(self.grid.dx * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "ComplexField") -> complex:
        """L2 inner product, conjugate-linear in ``self``."""
        return complex(self.grid.dx * np.vdot(self.values, other.values))

    def scaled(self, c: complex) -> "ComplexField":
        return ComplexField(self.grid, c * self.values)

    def add(self, other: "ComplexField") -> "ComplexField":
        return ComplexField(self.grid, self.values + other.values)

    def sub(self, other: "ComplexField") -> "ComplexField":
        return ComplexField(self.grid, self.values - other.values)

    def distance(self, other: "ComplexField") -> float:
        return self.sub(other).norm()

    def boundary_mass(self) -> float:
        """Probability mass in the outermost grid points on either side."""
        edge = max(1, int(self.grid.n * BOUNDARY_FRACTION))
        dens = np.abs(self.values) ** 2
        return float(self.grid.dx * (np.sum(dens[:edge]) + np.sum(dens[-edge:])))

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "ComplexField":
        grid = Grid.from_dict(d["grid"])
        return ComplexField(grid, np.array(d["re"]) + 1j * np.array(d["im"]))


@dataclass(frozen=True)
class SpinorField:
    """Two-component (up/down) field for the particle-1 + spin subsystem."""

    up: ComplexField
    down: ComplexField

    def __post_init__(self):
        if self.up.grid != self.down.grid:
            raise InvalidInputError("spinor components must share one grid")

    @property
    def grid(self) -> Grid:
        return self.up.grid

    @staticmethod
    def from_down(down: ComplexField) -> "SpinorField":
        return SpinorField(up=ComplexField.zeros(down.grid), down=down)

    def norm(self) -> float:
        return float(np.sqrt(self.up.norm() ** 2 + self.down.norm() ** 2))

    def distance(self, other: "SpinorField") -> float:
        return float(
            np.sqrt(
                self.up.distance(other.up) ** 2 + self.down.distance(other.down) ** 2
            )
        )

    def boundary_mass(self) -> float:
        return self.up.boundary_mass() + self.down.boundary_mass()

    def to_dict(self) -> dict:
        return {"up": self.up.to_dict(), "down": self.down.to_dict()}

    @staticmethod
    def from_dict(d: dict) -> "SpinorField":
        return SpinorField(
            up=ComplexField.from_dict(d["up"]), down=ComplexField.from_dict(d["down"])
        )


@dataclass(frozen=True)
class StateTerm:
    """One tensor-product term (particle-1 spinor) x (particle-2 field)."""

    particle1: SpinorField
    particle2: ComplexField
    coefficient: complex

    def to_dict(self) -> dict:
        return {
            "coefficient": [self.coefficient.real, self.coefficient.imag],
            "particle1": self.particle1.to_dict(),
            "particle2": self.particle2.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "StateTerm":
        re, im = d["coefficient"]
        return StateTerm(
            particle1=SpinorField.from_dict(d["particle1"]),
            particle2=ComplexField.from_dict(d["particle2"]),
            coefficient=complex(re, im),
        )


class TwoParticleState:
    """Sum of tensor-product terms, never materialized as a 2D grid.

    Norms and probabilities are evaluated through the Gram matrices of the
    particle-1 and particle-2 factors, so interference between terms is
    always included.
    """

    def __init__(self, terms: Sequence[StateTerm]):
        terms = tuple(terms)
        if not terms:
            raise InvalidInputError("a state needs at least one term")
        g1 = terms[0].particle1.grid
        g2 = terms[0].particle2.grid
        for t in terms:
            if t.particle1.grid != g1 or t.particle2.grid != g2:
                raise InvalidInputError("all terms must share grids")
        self.terms = terms

    def __iter__(self) -> Iterator[StateTerm]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def grid1(self) -> Grid:
        return self.terms[0].particle1.grid

    @property
    def grid2(self) -> Grid:
        return self.terms[0].particle2.grid

    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms], dtype=np.complex128)

    def spin_gram(self, spin: str) -> np.ndarray:
        """Gram matrix <s_i, s_j> of the chosen spin components of particle 1."""
        comps = [
            t.particle1.up if spin == "up" else t.particle1.down for t in self.terms
        ]
        m = len(comps)
        g = np.empty((m, m), dtype=np.complex128)
        for i in range(m):
            for j in range(m):
                g[i, j] = comps[i].inner(comps[j])
        return g

    def particle2_gram(self) -> np.ndarray:
        m = len(self.terms)
        g = np.empty((m, m), dtype=np.complex128)
        for i in range(m):
            for j in range(m):
                g[i, j] = self.terms[i].particle2.inner(self.terms[j].particle2)
        return g

    def component_norm_sq(self, spin: str) -> float:
        """Squared L2 norm of the spin-``spin`` block of the full wavefunction."""
        c = self.coefficients()
        val = np.einsum("i,j,ij,ij->", np.conj(c), c, self.spin_gram(spin), self.particle2_gram())
        return float(val.real)

    def norm(self) -> float:
        return float(
            np.sqrt(self.component_norm_sq("up") + self.component_norm_sq("down"))
        )

    def distance(self, other: "TwoParticleState") -> float:
        """L2 distance computed from the joint Gram matrix of all terms."""
        merged = list(self.terms) + [
            StateTerm(t.particle1, t.particle2, -t.coefficient) for t in other.terms
        ]
        return TwoParticleState(merged).norm()

    def to_dict(self) -> dict:
        return {"terms": [t.to_dict() for t in self.terms]}

    @staticmethod
    def from_dict(d: dict) -> "TwoParticleState":
        return TwoParticleState([StateTerm.from_dict(t) for t in d["terms"]])


def require_low_boundary_mass(mass: float, where: str) -> None:
    if mass > BOUNDARY_MASS_LIMIT:
        raise BoundaryMassError(
            f"{where}: boundary mass {mass:.3e} exceeds {BOUNDARY_MASS_LIMIT:.0e}; "
            "widen the grid domain"
        )
