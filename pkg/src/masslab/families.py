"""Explicit witness families: dilations, rescaled Q, cut-off Q, mass scaling.

Dilations are realized by rescaling the grid rather than resampling: the field
u^t(r) = t^(N/2) u(t r) is stored on nodes r_i / t with values t^(N/2) u(r_i).
The discrete functionals are covariant under that map, so mass is preserved
exactly and the scaling laws hold to rounding error at any t, including the
very large t needed before the Hartree term stops dominating.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, TruncationError
from .functionals import Model, Potential, energy
from .grid import Field, dilate
from .groundstate import GroundState

MASS_TOL = 1e-8
DIVERGENCE_RUN = 5
DIVERGENCE_FACTOR = 1e3
# the final energy must also undercut -WITNESS_MARGIN * A, so a witness cannot be
# built from the O(h^4) defect of the discrete GN inequality at c = c*
WITNESS_MARGIN = 1e-6
K_MAX = 24


@dataclass(frozen=True)
class FamilyPoint:
    field: Field
    parameter: float
    normalization: float
    target_mass: float
    meta: dict = field(default_factory=dict)

    def energy(self, model: Model):
        """Model energy of the member; an off-center cut-off reads V along its slice."""
        shift = self.meta.get("x0_radius", 0.0)
        if shift and model.potential is not None:
            table = shifted_potential(model.potential, shift, self.field.grid.r_max)
            model = Model(model.kind, model.dim, table, model.mu)
        return energy(model, self.field)


def _rescaled(u: Field, t: float, factor: float = 1.0) -> Field:
    grid = u.grid.scaled(1.0 / t)
    values = factor * t ** (grid.dim / 2.0) * u.values
    return Field(grid, values, {"dilation": t})


def dilation_family(u: Field, c: float, t: float, resample: bool = False) -> FamilyPoint:
    """u^t(x) = t^(N/2) u(t x), a mass-preserving dilation.

    With ``resample`` the member is interpolated back onto u's own grid;
    mass pushed past r_max then raises TruncationError.
    """
    if not t > 0:
        raise DomainError(f"dilation parameter must be positive, got {t}")
    if not u.in_sphere(c, MASS_TOL):
        raise DomainError(f"field mass {u.mass} is not c = {c}")
    if resample:
        out = dilate(u, t)
        if abs(out.mass - c) > MASS_TOL * c:
            raise TruncationError(f"dilation by {t} loses relative mass {out.meta['mass_loss']:.2e}")
    else:
        out = u if t == 1.0 else _rescaled(u, t)
    return FamilyPoint(out, t, 1.0, c)


def scaled_Q_family(groundstate: GroundState, c: float, t: float) -> FamilyPoint:
    """Q^t(x) = t^(N/2) sqrt(c/c*) Q(t x), of mass exactly c."""
    if not c > 0 or not t > 0:
        raise DomainError("scaled_Q_family needs c > 0 and t > 0")
    q = groundstate.profile
    return FamilyPoint(_rescaled(q, t, np.sqrt(c / groundstate.cstar)), t, 1.0, c)


def scaled_Q_closed_form(A_Q: float, B_Q: float, c: float, cstar: float, t: float, dim: int = 3) -> float:
    """t^2 (c/c*) A(Q) [1 - (c/c*)^(2/N)] + t (c/c*)^2 B(Q)."""
    s = c / cstar
    return t * t * s * A_Q * (1.0 - s ** (2.0 / dim)) + t * s * s * B_Q


def ramp(x) -> np.ndarray:
    """C^1 cut-off: 1 on [0, 1], 0 beyond 2, quintic smoothstep in between."""
    x = np.asarray(x, dtype=float)
    s = np.clip(x - 1.0, 0.0, 1.0)
    return 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s * s)


def cutoff_family(groundstate: GroundState, c: float, rho: float, x0_radius: float = 0.0) -> FamilyPoint:
    """u^rho = A_rho sqrt(c/c*) rho^(N/2) psi(x - x0) Q(rho (x - x0)).

    The field is radial about x0.  For x0 != 0 the potential is read along the
    radial slice, V(|x0| + r), and attached to the point's metadata; this is a
    one-dimensional approximation of the off-center energy.
    """
    if rho < 1:
        raise DomainError(f"rho must be >= 1, got {rho}")
    if not c > 0 or x0_radius < 0:
        raise DomainError("cutoff_family needs c > 0 and x0_radius >= 0")
    base = _rescaled(groundstate.profile, rho, np.sqrt(c / groundstate.cstar))
    raw = Field(base.grid, base.values * ramp(base.grid.nodes))
    a_rho = float(np.sqrt(c / raw.mass))
    out = Field(raw.grid, a_rho * raw.values, {"dilation": rho})
    meta = {"x0_radius": float(x0_radius)} if x0_radius > 0 else {}
    return FamilyPoint(out, rho, a_rho, c, meta)


def shifted_potential(potential: Potential, x0_radius: float, extent: float) -> Potential:
    """Table of V(x0_radius + r) on [0, extent] (radial-slice approximation)."""
    r = np.linspace(0.0, extent, 257)
    return Potential.table(r, potential(x0_radius + r), confining=potential.confining)


def mass_scale(u: Field, theta: float) -> Field:
    """sqrt(theta) u; mass scales by theta."""
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta}")
    return u.scaled(np.sqrt(theta))


@dataclass(frozen=True)
class DivergenceWitness:
    parameters: tuple
    energies: tuple
    certified: bool
    decreasing_run: int
    threshold: float

    def describe(self) -> dict:
        return {
            "parameters": list(self.parameters),
            "energies": list(self.energies),
            "certified": self.certified,
            "decreasing_run": self.decreasing_run,
            "threshold": self.threshold,
        }


def certify_divergence(parameters, energies, kinetic=None) -> DivergenceWitness:
    """-infinity witness: the last >= 5 doublings strictly decrease the energy and
    the final value is below -10^3 (|initial| + 1) (and below -WITNESS_MARGIN
    times the final kinetic energy when ``kinetic`` is given)."""
    e = np.asarray(energies, dtype=float)
    run = 0
    for k in range(len(e) - 1, 0, -1):
        if e[k] < e[k - 1]:
            run += 1
        else:
            break
    threshold = -DIVERGENCE_FACTOR * (abs(e[0]) + 1.0)
    ok = run >= DIVERGENCE_RUN and e[-1] < threshold
    if kinetic is not None:
        ok = ok and e[-1] < -WITNESS_MARGIN * kinetic[-1]
    ok = bool(ok)
    return DivergenceWitness(tuple(map(float, parameters)), tuple(map(float, e)), ok, run, threshold)


def divergence_witness(model: Model, member, k_max: int = K_MAX) -> DivergenceWitness:
    """Double the family parameter 2^k, k = 0..k_max, stopping once certified.

    ``member`` maps the parameter to a FamilyPoint.
    """
    params, energies, kinetic = [], [], []
    witness = None
    for k in range(k_max + 1):
        t = 2.0**k
        e = member(t).energy(model)
        params.append(t)
        energies.append(e.total)
        kinetic.append(e.A)
        witness = certify_divergence(params, energies, kinetic)
        if witness.certified:
            break
    return witness


def scaled_Q_witness(model: Model, groundstate: GroundState, c: float, k_max: int = K_MAX) -> DivergenceWitness:
    return divergence_witness(model, lambda t: scaled_Q_family(groundstate, c, t), k_max)


def cutoff_witness(
    model: Model, groundstate: GroundState, c: float, x0_radius: float = 0.0, k_max: int = K_MAX
) -> DivergenceWitness:
    return divergence_witness(model, lambda r: cutoff_family(groundstate, c, r, x0_radius), k_max)


def dilation_probe(model: Model, u: Field, c: float, k_max: int = 10) -> tuple:
    """Energies of u^t for t = 2^-k, k = 0..k_max (the t -> 0+ witness)."""
    return tuple(energy(model, dilation_family(u, c, 2.0**-k).field).total for k in range(k_max + 1))
