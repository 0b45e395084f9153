"""Weighted first Dirichlet eigenvalue on a ball.

mu_1 = inf { int |grad u|^2 : u in H^1_0(B_R), int V u^2 = 1 }.

On the radial grid over [0, R] (whose Dirichlet node sits at R) this is the
generalized problem K phi = mu W_V phi, solved by inverse iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import splu

from .errors import ConfigurationError, DomainError, SolverError
from .functionals import Potential
from .grid import Field, RadialGrid, build_grid

DEFAULT_RADIUS = 4.0
DEFAULT_POINTS = 1024
EIGEN_TOL = 1e-12


@dataclass(frozen=True)
class EigenResult:
    mu1: float
    eigenfunction: Field
    domain_radius: float
    weight_norm: float
    iterations: int = 0

    @property
    def grid(self) -> RadialGrid:
        return self.eigenfunction.grid

    def test_function(self, c: float) -> Field:
        """phi_c = sqrt(c) phi / |phi|_2 on the ball grid (zero outside B_R)."""
        return self.eigenfunction.normalized(c)

    def on_grid(self, grid: RadialGrid) -> Field:
        """phi interpolated onto another grid, extended by zero beyond R."""
        if grid.dim != self.grid.dim:
            raise ConfigurationError("dimension mismatch")
        spline = CubicSpline(self.grid.nodes, self.eigenfunction.values, bc_type=((1, 0.0), "not-a-knot"))
        x = grid.nodes
        inside = x < self.domain_radius
        vals = np.zeros(grid.points)
        vals[inside] = spline(x[inside])
        return Field(grid, vals)

    def describe(self) -> dict:
        return {"mu1": self.mu1, "radius": self.domain_radius, "weight_norm": self.weight_norm}


def compute_mu1(
    potential: Potential,
    R: float = DEFAULT_RADIUS,
    grid_points: int = DEFAULT_POINTS,
    dim: int = 3,
    max_iter: int = 500,
) -> EigenResult:
    if not R > 0:
        raise ConfigurationError(f"ball radius must be positive, got {R}")
    grid = build_grid(dim, R, grid_points)
    idx = np.flatnonzero(grid.free)
    v = potential(grid.nodes)
    wv = grid.weights * v
    if not np.any(wv[idx] > 0):
        raise DomainError("weight V vanishes on the ball; mu_1 is undefined")
    k = grid.stiffness[idx][:, idx].tocsc()
    lu = splu(k)
    mv = sp.diags(wv[idx])

    x = np.ones(idx.size)
    mu = np.inf
    for it in range(1, max_iter + 1):
        y = lu.solve(mv @ x)
        norm = float(np.sqrt(y @ (mv @ y)))
        y /= norm
        new_mu = float(y @ (k @ y))
        x = y
        if abs(new_mu - mu) <= EIGEN_TOL * new_mu:
            mu = new_mu
            break
        mu = new_mu
    else:
        raise SolverError(f"inverse iteration did not converge in {max_iter} steps")

    phi = np.zeros(grid.points)
    phi[idx] = x * np.sign(x.sum())
    phi = grid.complete(phi)
    field = Field(grid, phi, {"kind": "eigenfunction"})
    weight_norm = float(grid.weights @ (v * phi * phi))
    return EigenResult(mu, field, float(R), weight_norm, it)


def rayleigh_quotient(potential: Potential, u: Field) -> float:
    """int |grad u|^2 / int V u^2 for a Dirichlet field on a ball grid."""
    grid = u.grid
    x = grid.complete(u.values)
    return float(x @ (grid.stiffness @ x)) / float(grid.weights @ (potential(grid.nodes) * x * x))


def constant_weight(value: float = 1.0) -> Potential:
    """V = value everywhere (as a table), the classical Dirichlet-Laplacian case."""
    r = np.linspace(0.0, 1.0, 8)
    return Potential.table(r, np.full(r.size, float(value)), confining=False)
