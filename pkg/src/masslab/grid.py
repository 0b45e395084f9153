"""Radial discretization of R^N.

A :class:`RadialGrid` is a uniform mesh ``0 = r_0 < ... < r_{M-1} = r_max``.
Fields are even in ``r`` at the origin and obey a homogeneous Dirichlet
condition at ``r_max``.  Every integral over R^N is a weighted sum
``sum(w_i g(r_i))`` whose weights carry the surface factor
``omega_N r^(N-1)``.

The kinetic energy is the quadratic form ``0.5 * u @ K @ u`` with
``K = P^T G^T S G P``: ``G`` is the fourth-order staggered first derivative,
``S`` the face quadrature weights and ``P`` the map that fills the dependent
nodes (origin value for ``N >= 2``, the Dirichlet node at ``r_max``).  Because
``K`` is assembled as a Gram matrix, ``W^-1 K`` is symmetric in the
quadrature inner product and every gradient built on it is the exact
derivative of the discrete energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import gamma, pi

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import factorized
from scipy.special import bernoulli

from .errors import ConfigurationError, DomainError, ShapeError

DEFAULT_RESOLUTION = {1: (4096, 20.0), 2: (2048, 16.0), 3: (2048, 16.0)}
INTERP_TOL = 1e-8

# (offset, coefficient * h) of the fourth-order staggered derivative at r_{k+1/2}
_STAGGERED = ((-1, 1.0 / 24.0), (0, -27.0 / 24.0), (1, 27.0 / 24.0), (2, -1.0 / 24.0))
_END_ORDER = 6
_ORIGIN_NODES = 8
# even extrapolation of the origin value from r_1, r_2, r_3 (exact for 1, r^2, r^4)
_ORIGIN_EXTRAP = (1.5, -0.6, 0.1)


def sphere_area(dim: int) -> float:
    """Surface area of the unit sphere in R^dim (2 for dim = 1)."""
    return 2.0 * pi ** (dim / 2.0) / gamma(dim / 2.0)


def ball_volume(dim: int, radius: float) -> float:
    return sphere_area(dim) * radius**dim / dim


def _end_corrections(order: int) -> np.ndarray:
    """Gregory corrections to the composite trapezoid rule, in units of h, at
    x = R - j h, j = 0..order-1.

    They cancel the Euler-Maclaurin end terms for polynomials of degree < order.
    """
    bern = bernoulli(order + 1)
    offsets = -np.arange(order, dtype=float)
    vander = offsets[None, :] ** np.arange(order)[:, None]
    rhs = np.zeros(order)
    for k in range(1, order, 2):
        rhs[k] = -bern[k + 1] / (k + 1)
    return np.linalg.solve(vander, rhs)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform radial mesh with quadrature weights and cached operators.

    Grids are immutable; operators are built lazily and shared by every field
    living on the grid.
    """

    dim: int
    r_max: float
    points: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ConfigurationError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not np.isfinite(self.r_max) or self.r_max <= 0:
            raise ConfigurationError(f"r_max must be positive, got {self.r_max}")
        if self.points < 16:
            raise ConfigurationError(f"need at least 16 points, got {self.points}")

    @cached_property
    def nodes(self) -> np.ndarray:
        r = np.linspace(0.0, self.r_max, self.points)
        r.flags.writeable = False
        return r

    @property
    def h(self) -> float:
        return self.r_max / (self.points - 1)

    @property
    def omega(self) -> float:
        return sphere_area(self.dim)

    def __len__(self):
        return self.points

    def __repr__(self):
        return f"RadialGrid(dim={self.dim}, r_max={self.r_max!r}, points={self.points})"

    def describe(self) -> dict:
        return {"dim": self.dim, "r_max": self.r_max, "points": self.points}

    def scaled(self, factor: float) -> "RadialGrid":
        """Same number of nodes on [0, factor * r_max]."""
        return RadialGrid(self.dim, self.r_max * factor, self.points)

    # ---- operator assembly -------------------------------------------------

    @cached_property
    def face_weights(self) -> np.ndarray:
        """Midpoint weights at r_{k+1/2}, k = 0..M-2.

        No end corrections: with the odd reflection at r_max, |u'|^2 is even
        about r_max, and corrections that oscillate there let spurious
        boundary modes lower the discrete kinetic energy.
        """
        h = self.h
        faces = (np.arange(self.points - 1) + 0.5) * h
        return self.omega * h * faces ** (self.dim - 1)

    @cached_property
    def derivative(self) -> sp.csr_matrix:
        """Staggered derivative G: node values -> u'(r_{k+1/2})."""
        m = self.points
        last = m - 1
        rows, cols, vals = [], [], []
        for k in range(m - 1):
            for off, coef in _STAGGERED:
                j, sign = k + off, 1.0
                if j < 0:
                    j = -j
                elif j > last:
                    j, sign = 2 * last - j, -1.0
                rows.append(k)
                cols.append(j)
                vals.append(sign * coef / self.h)
        return sp.csr_matrix((vals, (rows, cols)), shape=(m - 1, m))

    @cached_property
    def extension(self) -> sp.csr_matrix:
        """P: raw samples -> admissible samples (origin filled, r_max zeroed)."""
        m = self.points
        diag = np.ones(m)
        diag[-1] = 0.0
        p = sp.lil_matrix((m, m))
        p.setdiag(diag)
        if self.dim >= 2:
            p[0, 0] = 0.0
            for k, a in enumerate(_ORIGIN_EXTRAP, start=1):
                p[0, k] = a
        return p.tocsr()

    @cached_property
    def free(self) -> np.ndarray:
        """Boolean mask of independent nodes."""
        mask = np.ones(self.points, dtype=bool)
        mask[-1] = False
        if self.dim >= 2:
            mask[0] = False
        mask.flags.writeable = False
        return mask

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        """K with 0.5 u.K.u = 0.5 * int |grad u|^2."""
        g = self.derivative @ self.extension
        return (g.T @ sp.diags(self.face_weights) @ g).tocsr()

    @cached_property
    def operator_weights(self) -> np.ndarray:
        """Node weights consistent with the stiffness (W^-1 K ~ -Laplacian).

        Interior: omega h r^(N-1).  Near the origin for N >= 2 they are read off
        K applied to r^2 / (2N), whose Laplacian is exactly 1.
        """
        r = self.nodes
        w = self.omega * self.h * r ** (self.dim - 1)
        if self.dim == 1:
            w[0] *= 0.5
        else:
            q = r**2 / (2.0 * self.dim)
            n = min(_ORIGIN_NODES, self.points // 2)
            w[1 : n + 1] = -(self.stiffness @ q)[1 : n + 1]
            w[0] = 0.0
        return w

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights: operator weights plus Gregory corrections at r_max."""
        r = self.nodes
        w = self.operator_weights.copy()
        w[-1] *= 0.5
        corr = _end_corrections(_END_ORDER)
        idx = np.arange(self.points - 1, self.points - 1 - _END_ORDER, -1)
        w[idx] += self.omega * self.h * r[idx] ** (self.dim - 1) * corr
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ConfigurationError("quadrature weights must be finite and nonnegative")
        w.flags.writeable = False
        return w

    @cached_property
    def _free_index(self) -> np.ndarray:
        return np.flatnonzero(self.free)

    def complete(self, values: np.ndarray) -> np.ndarray:
        """Fill dependent nodes: even extrapolation at 0 (N >= 2), zero at r_max."""
        out = np.array(values, dtype=float, copy=True)
        if self.dim >= 2:
            out[0] = sum(a * out[k] for k, a in enumerate(_ORIGIN_EXTRAP, start=1))
        out[-1] = 0.0
        return out

    def shifted_solver(self, shift: float):
        """Factorized solve for (K + shift * W) restricted to the free nodes."""
        return self._shifted_solvers(float(shift))

    def _shifted_solvers(self, shift):
        cache = self.__dict__.setdefault("_solver_cache", {})
        if shift not in cache:
            idx = self._free_index
            mat = self.stiffness[idx][:, idx] + shift * sp.diags(self.weights[idx])
            cache[shift] = factorized(mat.tocsc())
        return cache[shift]


def build_grid(dim: int, r_max: float | None = None, points: int | None = None) -> RadialGrid:
    """Grid with the default resolution for ``dim`` unless overridden."""
    if dim not in DEFAULT_RESOLUTION:
        raise ConfigurationError(f"dim must be 1, 2 or 3, got {dim}")
    default_points, default_rmax = DEFAULT_RESOLUTION[dim]
    grid = RadialGrid(
        dim,
        float(default_rmax if r_max is None else r_max),
        int(default_points if points is None else points),
    )
    grid.weights  # validate eagerly
    return grid


def _check_samples(grid: RadialGrid, samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=float)
    if arr.shape != (grid.points,):
        raise ShapeError(f"expected {grid.points} samples, got shape {arr.shape}")
    return arr


def integrate(grid: RadialGrid, samples) -> float:
    """Quadrature of a radial function over R^N (truncated at r_max)."""
    return float(grid.weights @ _check_samples(grid, samples))


@dataclass(frozen=True, eq=False)
class Field:
    """Sampled radial function u(r_i) with a cached mass |u|_2^2."""

    grid: RadialGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.array(_check_samples(self.grid, self.values), copy=True)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_function(cls, grid: RadialGrid, func, **meta) -> "Field":
        return cls(grid, func(grid.nodes), dict(meta))

    @cached_property
    def mass(self) -> float:
        return integrate(self.grid, self.values**2)

    def with_values(self, values, **meta) -> "Field":
        return Field(self.grid, values, dict(meta))

    def scaled(self, factor: float) -> "Field":
        return Field(self.grid, factor * self.values)

    def normalized(self, c: float) -> "Field":
        """Exact L^2 projection onto the sphere of mass c."""
        m = self.mass
        if m <= 0:
            raise DomainError("cannot normalize the zero field")
        return self.scaled(np.sqrt(c / m))

    def in_sphere(self, c: float, mass_tol: float = 1e-8) -> bool:
        return abs(self.mass - c) <= mass_tol * c

    def inner(self, other: "Field") -> float:
        return integrate(self.grid, self.values * other.values)


def radial_laplacian(field: Field) -> Field:
    """u'' + (N-1)/r u' with the even limit N u''(0) at the origin.

    Interior values are -(K u)_i / w_i, fourth order away from the origin and
    second order at the first few nodes; the Dirichlet node at r_max is 0.
    """
    grid = field.grid
    u = field.values
    lap = np.zeros(grid.points)
    free = grid.free
    lap[free] = -(grid.stiffness @ u)[free] / grid.operator_weights[free]
    if grid.dim >= 2:
        upp0 = (-2.0 * u[2] + 32.0 * u[1] - 30.0 * u[0]) / (12.0 * grid.h**2)
        lap[0] = grid.dim * upp0
    return Field(grid, lap)


def dilate(field: Field, t: float) -> Field:
    """u^t(r) = t^(N/2) u(t r), resampled on the same grid by cubic splines.

    Mass that the dilation pushes beyond r_max is lost; when the relative
    loss exceeds INTERP_TOL the result carries ``meta['truncated'] = True``.
    """
    if not t > 0:
        raise DomainError(f"dilation parameter must be positive, got {t}")
    grid = field.grid
    if t == 1.0:
        return Field(grid, field.values, dict(field.meta))
    spline = CubicSpline(grid.nodes, field.values, bc_type=((1, 0.0), "not-a-knot"))
    x = t * grid.nodes
    inside = x <= grid.r_max
    vals = np.zeros(grid.points)
    vals[inside] = spline(x[inside])
    out = Field(grid, t ** (grid.dim / 2.0) * vals)
    loss = (field.mass - out.mass) / field.mass if field.mass > 0 else 0.0
    out.meta.update(dilation=t, mass_loss=loss, truncated=bool(loss > INTERP_TOL))
    return out
