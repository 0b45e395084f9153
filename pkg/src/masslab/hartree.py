"""Coulomb potential and Hartree energy of radial densities in R^3.

phi(r) = 4 pi [ (1/r) int_0^r rho s^2 ds + int_r^R rho s ds ],  rho = u^2,

evaluated with cumulative sums of fourth-order interval integrals.  The kink
of the Green's function 1/max(r, s) sits exactly on a node, so splitting the
integral there keeps the full order.  Beyond r_max the density is zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import pi

import numpy as np
import scipy.sparse as sp

from .errors import ModelError
from .grid import Field, RadialGrid

_INTERVAL = ((-1, -1.0 / 24.0), (0, 13.0 / 24.0), (1, 13.0 / 24.0), (2, -1.0 / 24.0))


@dataclass(frozen=True)
class CoulombSolution:
    phi: Field
    energy_B: float


def _interval_matrix(grid: RadialGrid, power: int, parity: float) -> sp.csr_matrix:
    """Rows: int_{r_j}^{r_j+1} rho(s) s^power ds, exact for cubic integrands."""
    r = grid.nodes
    m = grid.points
    rows, cols, vals = [], [], []
    for j in range(m - 1):
        for off, coef in _INTERVAL:
            k, sign = j + off, 1.0
            if k < 0:
                k, sign = -k, parity
            if k >= m:
                continue
            rows.append(j)
            cols.append(k)
            vals.append(sign * coef * grid.h * r[k] ** power)
    return sp.csr_matrix((vals, (rows, cols)), shape=(m - 1, m))


@lru_cache(maxsize=32)
def _operators(grid: RadialGrid):
    inner = _interval_matrix(grid, 2, 1.0)  # rho s^2 is even
    outer = _interval_matrix(grid, 1, -1.0)  # rho s is odd
    inv_r = np.zeros(grid.points)
    inv_r[1:] = 1.0 / grid.nodes[1:]
    return inner, outer, inv_r


def _require_3d(grid: RadialGrid):
    if grid.dim != 3:
        raise ModelError(f"the Hartree term is defined for N = 3 only, got N = {grid.dim}")


def potential_from_density(grid: RadialGrid, rho: np.ndarray) -> np.ndarray:
    _require_3d(grid)
    inner, outer, inv_r = _operators(grid)
    enclosed = np.concatenate(([0.0], np.cumsum(inner @ rho)))
    out = outer @ rho
    beyond = np.concatenate((np.cumsum(out[::-1])[::-1], [0.0]))
    return 4.0 * pi * (inv_r * enclosed + beyond)


def _adjoint_potential(grid: RadialGrid, rho: np.ndarray) -> np.ndarray:
    """W^-1 Kc^T (W rho), where phi = Kc rho; equals phi up to O(h^4)."""
    inner, outer, inv_r = _operators(grid)
    y = grid.weights * rho
    z = inv_r * y
    tail = np.cumsum(z[::-1])[::-1]  # sum_{i >= j} z_i
    head = np.cumsum(y)  # sum_{i <= j} y_i
    raw = 4.0 * pi * (inner.T @ tail[1:] + outer.T @ head[:-1])
    out = np.zeros(grid.points)
    pos = grid.weights > 0
    out[pos] = raw[pos] / grid.weights[pos]
    return out


def coulomb_potential(field: Field) -> CoulombSolution:
    """phi_u = |x|^-1 * u^2 and B(u) = 1/4 int phi_u u^2."""
    grid = field.grid
    _require_3d(grid)
    rho = grid.complete(field.values) ** 2
    phi = potential_from_density(grid, rho)
    energy = 0.25 * float(grid.weights @ (phi * rho))
    return CoulombSolution(Field(grid, phi), energy)


def hartree_energy(field: Field) -> float:
    return coulomb_potential(field).energy_B


def hartree_gradient(field: Field) -> np.ndarray:
    """Exact W-gradient of the discrete B: 0.5 u (phi + adjoint phi)."""
    grid = field.grid
    _require_3d(grid)
    u = grid.complete(field.values)
    rho = u**2
    phi = potential_from_density(grid, rho)
    return 0.5 * u * (phi + _adjoint_potential(grid, rho))
