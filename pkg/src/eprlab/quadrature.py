"""Composite Gauss-Legendre panels sized for oscillatory integrands.

A fixed-order rule resolves ``exp(i w s)`` once the phase swept per panel
stays below ~2 radians per node, with super-algebraic convergence beyond
that; callers start from a frequency estimate and double the panel count
until two successive results agree.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

GAUSS_ORDER = 24
#: target phase per node when sizing panels from a frequency estimate
RADIANS_PER_NODE = 1.6


@lru_cache(maxsize=8)
def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panels_for_phase(total_phase: float, order: int = GAUSS_ORDER) -> int:
    """Panel count so each panel sweeps at most ``order * RADIANS_PER_NODE``."""
    return max(1, math.ceil(abs(total_phase) / (order * RADIANS_PER_NODE)))


def gauss_panel_rule(
    lo: float, hi: float, n_panels: int, order: int = GAUSS_ORDER
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of ``n_panels`` Gauss-Legendre panels on [lo, hi]."""
    base_x, base_w = _leggauss(order)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    weights = (half[:, None] * base_w[None, :]).ravel()
    return nodes, weights
