"""Energy functionals of the four constrained problems and their gradients.

Every model is written as total = A + B - C + D with

    A = 1/2 int |grad u|^2         kinetic
    B = 1/4 int phi_u u^2          Hartree (SP kinds only)
    C = (1/p) int |u|^p            focusing, p = (2N + 4) / N
    D = +1/2 int V u^2             confined SP
      = -mu/2 int V u^2            decaying NLS

Fields are evaluated through ``grid.complete`` so the dependent nodes never
carry independent data, which makes ``gradient`` the exact derivative of the
discrete ``energy`` in the quadrature inner product.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, ModelError
from .grid import Field, RadialGrid
from .hartree import hartree_energy, hartree_gradient

# slack added before asserting inequalities that hold only up to quadrature error
INEQUALITY_SLACK = 1e-8


class PotentialKind(enum.Enum):
    HARMONIC = "harmonic"
    GAUSSIAN_DECAY = "gaussian"
    TABLE = "table"


@dataclass(frozen=True)
class Potential:
    """Radial external potential V(r) >= 0.

    HARMONIC: params = (a,), V = a r^2.
    GAUSSIAN_DECAY: params = (V0, width), V = V0 exp(-(r/width)^2).
    TABLE: params = (r_0, ..., r_k, V_0, ..., V_k), cubic interpolation;
    ``confining`` tells which model class the table belongs to.
    """

    kind: PotentialKind
    params: tuple
    confining: bool = False

    def __post_init__(self):
        p = self.params
        if self.kind is PotentialKind.HARMONIC:
            if len(p) != 1 or not p[0] > 0:
                raise ModelError("harmonic potential needs one coefficient a > 0")
            object.__setattr__(self, "confining", True)
        elif self.kind is PotentialKind.GAUSSIAN_DECAY:
            if len(p) != 2 or not p[0] > 0 or not p[1] > 0:
                raise ModelError("gaussian potential needs amplitude V0 > 0 and width > 0")
            object.__setattr__(self, "confining", False)
        elif self.kind is PotentialKind.TABLE:
            if len(p) < 8 or len(p) % 2:
                raise ModelError("table potential needs at least 4 (r, V) pairs")
            r, v = self._table()
            if r[0] != 0 or np.any(np.diff(r) <= 0):
                raise ModelError("table radii must start at 0 and increase")
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise ModelError("table values must be finite and nonnegative")

    @classmethod
    def harmonic(cls, a: float = 1.0) -> "Potential":
        return cls(PotentialKind.HARMONIC, (float(a),))

    @classmethod
    def gaussian(cls, v0: float = 1.0, width: float = 1.0) -> "Potential":
        return cls(PotentialKind.GAUSSIAN_DECAY, (float(v0), float(width)))

    @classmethod
    def table(cls, radii, values, confining: bool = False) -> "Potential":
        params = tuple(float(x) for x in radii) + tuple(float(x) for x in values)
        return cls(PotentialKind.TABLE, params, bool(confining))

    def _table(self):
        k = len(self.params) // 2
        return np.array(self.params[:k]), np.array(self.params[k:])

    def _spline(self) -> CubicSpline:
        r, v = self._table()
        return CubicSpline(r, v, bc_type=((1, 0.0), "not-a-knot"), extrapolate=True)

    @property
    def bound(self) -> float:
        """V0 with 0 <= V <= V0 (infinite for confining kinds)."""
        if self.kind is PotentialKind.GAUSSIAN_DECAY:
            return self.params[0]
        if self.kind is PotentialKind.TABLE and not self.confining:
            return float(self._table()[1].max())
        return float("inf")

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind is PotentialKind.HARMONIC:
            return self.params[0] * r**2
        if self.kind is PotentialKind.GAUSSIAN_DECAY:
            v0, width = self.params
            return v0 * np.exp(-((r / width) ** 2))
        table_r, table_v = self._table()
        out = self._spline()(np.minimum(r, table_r[-1]))
        return np.maximum(out, 0.0)

    def virial(self, r) -> np.ndarray:
        """r V'(r), the generator of V under dilations."""
        r = np.asarray(r, dtype=float)
        if self.kind is PotentialKind.HARMONIC:
            return 2.0 * self.params[0] * r**2
        if self.kind is PotentialKind.GAUSSIAN_DECAY:
            width = self.params[1]
            return -2.0 * (r / width) ** 2 * self(r)
        table_r = self._table()[0]
        slope = self._spline().derivative()(np.minimum(r, table_r[-1]))
        return np.where(r <= table_r[-1], r * slope, 0.0)

    def describe(self) -> dict:
        return {"kind": self.kind.value, "params": list(self.params), "confining": self.confining}


class ModelKind(enum.Enum):
    SP = "sp"
    SP_CONFINED = "sp_confined"
    NLS = "nls"
    NLS_DECAYING = "nls_decaying"


@dataclass(frozen=True)
class Model:
    kind: ModelKind
    dim: int = 3
    potential: Potential | None = None
    mu: float | None = None

    def __post_init__(self):
        if self.kind in (ModelKind.SP, ModelKind.SP_CONFINED) and self.dim != 3:
            raise ModelError(f"{self.kind.name} is posed in dimension 3, got {self.dim}")
        if self.dim not in (1, 2, 3):
            raise ModelError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.kind is ModelKind.SP_CONFINED:
            if self.potential is None or not self.potential.confining:
                raise ModelError("SP_CONFINED requires a confining potential")
        elif self.kind is ModelKind.NLS_DECAYING:
            if self.potential is None or self.potential.confining:
                raise ModelError("NLS_DECAYING requires a decaying potential")
            if self.mu is None or not self.mu > 0:
                raise ModelError("NLS_DECAYING requires mu > 0")
        elif self.potential is not None or self.mu is not None:
            raise ModelError(f"{self.kind.name} takes no potential")

    @classmethod
    def sp(cls) -> "Model":
        return cls(ModelKind.SP)

    @classmethod
    def sp_confined(cls, potential: Potential | None = None) -> "Model":
        return cls(ModelKind.SP_CONFINED, 3, potential or Potential.harmonic())

    @classmethod
    def nls(cls, dim: int) -> "Model":
        return cls(ModelKind.NLS, dim)

    @classmethod
    def nls_decaying(cls, dim: int, mu: float, potential: Potential | None = None) -> "Model":
        return cls(ModelKind.NLS_DECAYING, dim, potential or Potential.gaussian(), float(mu))

    @property
    def exponent(self) -> float:
        return (2.0 * self.dim + 4.0) / self.dim

    @property
    def has_hartree(self) -> bool:
        return self.kind in (ModelKind.SP, ModelKind.SP_CONFINED)

    @property
    def potential_sign(self) -> float:
        """Coefficient of 1/2 int V u^2 in the total."""
        if self.kind is ModelKind.SP_CONFINED:
            return 1.0
        if self.kind is ModelKind.NLS_DECAYING:
            return -self.mu
        return 0.0

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "dim": self.dim,
            "potential": None if self.potential is None else self.potential.describe(),
            "mu": self.mu,
        }


@dataclass(frozen=True)
class EnergyBreakdown:
    A: float
    B: float
    C: float
    D: float
    total: float
    mass: float


def _check(model: Model, field: Field) -> np.ndarray:
    if field.grid.dim != model.dim:
        raise ModelError(f"field lives in dimension {field.grid.dim}, model in {model.dim}")
    u = field.grid.complete(field.values)
    if not np.all(np.isfinite(u)):
        raise DomainError("field has non-finite samples")
    return u


def kinetic(field: Field) -> float:
    """A(u) = 1/2 int |grad u|^2."""
    u = field.grid.complete(field.values)
    return 0.5 * float(u @ (field.grid.stiffness @ u))


def power_integral(field: Field, p: float) -> float:
    """int |u|^p."""
    u = field.grid.complete(field.values)
    return float(field.grid.weights @ np.abs(u) ** p)


def energy(model: Model, field: Field) -> EnergyBreakdown:
    u = _check(model, field)
    grid = field.grid
    w = grid.weights
    p = model.exponent
    a = 0.5 * float(u @ (grid.stiffness @ u))
    b = hartree_energy(field.with_values(u)) if model.has_hartree else 0.0
    c = float(w @ np.abs(u) ** p) / p
    d = 0.0
    if model.potential is not None:
        d = model.potential_sign * 0.5 * float(w @ (model.potential(grid.nodes) * u * u))
        if not np.isfinite(d):
            raise DomainError("potential energy is not finite")
    return EnergyBreakdown(a, b, c, d, a + b - c + d, float(w @ (u * u)))


def gradient(model: Model, field: Field) -> Field:
    """W-gradient g: <g, v> = d/de energy(u + e v) for every v."""
    u = _check(model, field)
    grid = field.grid
    p = model.exponent
    g = np.zeros(grid.points)
    free = grid.free
    g[free] = (grid.stiffness @ u)[free] / grid.weights[free]
    g -= np.abs(u) ** (p - 2.0) * u
    if model.has_hartree:
        g += hartree_gradient(field.with_values(u))
    if model.potential is not None:
        g += model.potential_sign * model.potential(grid.nodes) * u
    return Field(grid, grid.complete(g))


def gn_gap(field: Field, cstar: float) -> float:
    """(N+2)/(N c*^(2/N)) int|grad u|^2 (int u^2)^(2/N) - int |u|^p; >= 0, = 0 at Q."""
    n = field.grid.dim
    mass = field.mass
    if mass <= 0:
        raise DomainError("gn_gap of the zero field")
    grad2 = 2.0 * kinetic(field)
    lhs = (n + 2.0) / (n * cstar ** (2.0 / n)) * grad2 * mass ** (2.0 / n)
    return lhs - power_integral(field, (2.0 * n + 4.0) / n)


def pohozaev_residual(model: Model, field: Field, lam: float) -> float:
    """N/2 * (Nehari) - (virial), left minus right.

    For SP this is A + 5B - 3C - 3/2 lam c; for NLS it is
    (N-2)/2 int|grad u|^2 - N^2/(2N+4) int|u|^p - N/2 lam c.  Potential terms
    enter through 1/2 int V u^2 and 1/2 int r V'(r) u^2.
    """
    e = energy(model, field)
    n = model.dim
    p = model.exponent
    nehari = 2.0 * e.A + 4.0 * e.B - p * e.C + 2.0 * e.D - lam * e.mass
    virial = 2.0 * e.A + e.B - 2.0 * e.C
    if model.potential is not None:
        u = field.grid.complete(field.values)
        rv = model.potential.virial(field.grid.nodes)
        virial -= model.potential_sign * 0.5 * float(field.grid.weights @ (rv * u * u))
    return 0.5 * n * nehari - virial
