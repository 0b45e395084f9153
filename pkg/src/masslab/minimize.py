"""Minimization on the mass sphere S(c) and classification of the infimum.

The flow is a projected gradient descent preconditioned by
H = K + W (alpha + V+), where V+ is the potential when it enters the energy
with a positive sign.  Each step

    d = H^-1 W g - (<u, H^-1 W g> / <u, H^-1 W u>) H^-1 W u
    u <- sqrt(c / |u - tau d|^2) (u - tau d)

uses a direction tangent to the sphere, and tau is halved until the energy
does not increase, so the energy sequence is monotone.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import factorized

from .config import SolverConfig
from .errors import DiagnosticError, DomainError, ModelError, NumericalError, SolverError
from .families import cutoff_witness, dilation_probe, scaled_Q_family, scaled_Q_witness
from .functionals import INEQUALITY_SLACK, Model, ModelKind, energy, gradient
from .grid import Field, RadialGrid, build_grid
from .groundstate import GroundState

__all__ = [
    "Classification",
    "Evidence",
    "MinimizeReport",
    "SolverConfig",
    "Status",
    "classify_infimum",
    "classify_with_evidence",
    "lagrange_multiplier",
    "minimize_on_sphere",
    "random_field",
]

PRECONDITIONER_SHIFT = 1.0
MAX_BACKTRACKS = 40
STEP_GROWTH = 1.5
MAX_STEP = 64.0
# relative distance to c* treated as "exactly at the threshold"
THRESHOLD_TOL = 1e-8


class Status(enum.Enum):
    CONVERGED = "converged"
    STALLED = "stalled"
    DIVERGED = "diverged"
    MAX_ITER = "max_iter"


class Classification(enum.Enum):
    ZERO_NOT_ATTAINED = "zero_not_attained"
    ATTAINED = "attained"
    MINUS_INFINITY = "minus_infinity"


@dataclass(frozen=True)
class MinimizeReport:
    model: Model
    mass_c: float
    minimizer: Field
    energy: float
    lagrange: float
    grad_residual: float
    iterations: int
    status: Status
    history: tuple = ()

    def describe(self) -> dict:
        return {
            "mass_c": self.mass_c,
            "energy": self.energy,
            "lagrange": self.lagrange,
            "grad_residual": self.grad_residual,
            "iterations": self.iterations,
            "status": self.status.value,
        }


def random_field(grid: RadialGrid, c: float, seed: int = 0) -> Field:
    """Positive Gaussian bump with a seeded smooth perturbation, mass c."""
    rng = np.random.default_rng(seed)
    r = grid.nodes
    width = rng.uniform(0.8, 1.6)
    bump = np.exp(-0.5 * (r / width) ** 2)
    modes = sum(rng.uniform(-0.05, 0.05) * np.cos(k * r / width) for k in range(1, 4))
    values = grid.complete(bump * (1.0 + modes))
    return Field(grid, values, {"seed": seed}).normalized(c)


def lagrange_multiplier(model: Model, field: Field) -> float:
    """lambda = <gradient, u> / |u|_2^2."""
    mass = field.mass
    if mass <= 0:
        raise DomainError("Lagrange multiplier of the zero field")
    return gradient(model, field).inner(field) / mass


def _preconditioner(model: Model, grid: RadialGrid):
    cache = grid.__dict__.setdefault("_precond_cache", {})
    key = (model.kind, model.potential, model.mu)
    if key not in cache:
        idx = np.flatnonzero(grid.free)
        shift = np.full(grid.points, PRECONDITIONER_SHIFT)
        if model.potential is not None and model.potential_sign > 0:
            shift = shift + model.potential_sign * model.potential(grid.nodes)
        mat = grid.stiffness[idx][:, idx] + sp.diags(grid.weights[idx] * shift[idx])
        solve = factorized(mat.tocsc())

        def apply(v):
            out = np.zeros(grid.points)
            out[idx] = solve(grid.weights[idx] * v[idx])
            return out

        cache[key] = apply
    return cache[key]


def minimize_on_sphere(
    model: Model,
    c: float,
    init: Field | str | None = "random",
    cfg: SolverConfig | None = None,
    grid: RadialGrid | None = None,
) -> MinimizeReport:
    if not c > 0:
        raise DomainError(f"mass must be positive, got {c}")
    cfg = cfg or SolverConfig()
    if isinstance(init, Field):
        grid = init.grid
        u = Field(grid, grid.complete(init.values)).normalized(c)
    else:
        if init not in (None, "random"):
            raise ModelError(f"unknown initial field {init!r}")
        grid = grid or build_grid(model.dim)
        u = random_field(grid, c, cfg.seed)
    if grid.dim != model.dim:
        raise ModelError("grid dimension does not match the model")

    precond = _preconditioner(model, grid)
    w = grid.weights
    tau = cfg.step
    e = energy(model, u).total
    history = [e]
    stall = 0
    status = Status.MAX_ITER
    lam, residual = 0.0, np.inf
    it = 0
    for it in range(cfg.max_iter + 1):
        x = u.values
        g = gradient(model, u).values
        lam = float(w @ (g * x)) / c
        res = g - lam * x
        residual = float(np.sqrt(w @ res**2) / ((1.0 + abs(lam)) * np.sqrt(c)))
        if not np.isfinite(residual):
            raise NumericalError("non-finite gradient in the flow")
        if residual <= cfg.grad_tol:
            status = Status.CONVERGED
            break
        if e < cfg.divergence_floor:
            status = Status.DIVERGED
            break
        if stall >= cfg.stall_window:
            status = Status.STALLED
            break
        if it == cfg.max_iter:
            break
        a = precond(g)
        b = precond(x)
        d = a - (float(w @ (x * a)) / float(w @ (x * b))) * b
        for _ in range(MAX_BACKTRACKS):
            trial = grid.complete(x - tau * d)
            m = float(w @ trial**2)
            if m > 0 and np.isfinite(m):
                cand = Field(grid, trial * np.sqrt(c / m))
                e_new = energy(model, cand).total
                if e_new <= e:
                    break
            tau *= cfg.backtracking
        else:
            status = Status.STALLED
            break
        change = abs(e_new - e) / max(abs(e), np.finfo(float).tiny)
        stall = stall + 1 if change < cfg.energy_tol else 0
        u, e = cand, e_new
        history.append(e)
        tau = min(tau * STEP_GROWTH, MAX_STEP)
    return MinimizeReport(model, c, u, e, lam, residual, it, status, tuple(history))


# ---- classification ---------------------------------------------------------


@dataclass(frozen=True)
class Evidence:
    classification: Classification
    energy: float
    lagrange: float | None = None
    report: MinimizeReport | None = None
    witness: object = None
    probes: tuple = ()
    notes: dict = field(default_factory=dict)

    def describe(self) -> dict:
        out = {
            "classification": self.classification.value,
            "energy": self.energy,
            "lagrange": self.lagrange,
            "notes": dict(self.notes),
        }
        if self.report is not None:
            out["report"] = self.report.describe()
        if self.witness is not None:
            out["witness"] = self.witness.describe()
        if self.probes:
            out["dilation_probe"] = list(self.probes)
        return out


def lower_bound_holds(model: Model, c: float, gs: GroundState, fields) -> bool:
    """E(u) >= (1 - (c/c*)^(2/N)) A(u) + B(u) on every probe (c <= c*)."""
    coeff = 1.0 - (c / gs.cstar) ** (2.0 / model.dim)
    for u in fields:
        e = energy(model, u)
        bound = coeff * e.A + e.B + min(e.D, 0.0)
        if e.total < bound - INEQUALITY_SLACK * max(1.0, e.A):
            return False
    return True


def _probe_fields(gs: GroundState, c: float, seed: int):
    fields = [scaled_Q_family(gs, c, t).field for t in (0.25, 0.5, 1.0, 2.0, 4.0)]
    for k in range(3):
        fields.append(random_field(gs.grid, c, seed + k))
    return fields


def _zero_evidence(model: Model, c: float, gs: GroundState, cfg: SolverConfig, witness) -> Evidence:
    """Infimum 0 approached by dilations t -> 0+ and never undercut."""
    if c > gs.cstar * (1.0 + THRESHOLD_TOL):
        raise DiagnosticError(
            "no divergence witness above the threshold", witness=witness, mass=c, cstar=gs.cstar
        )
    if not lower_bound_holds(model, c, gs, _probe_fields(gs, c, cfg.seed)):
        raise DiagnosticError("GN lower bound violated below the threshold", witness=witness, mass=c)
    probes = dilation_probe(model, scaled_Q_family(gs, c, 1.0).field, c)
    decreasing = all(b < a for a, b in zip(probes, probes[1:]))
    if not (decreasing and probes[-1] >= 0 and probes[-1] < 1e-2 * probes[0]):
        raise DiagnosticError("dilation probe does not approach 0 from above", probes=probes)
    return Evidence(
        Classification.ZERO_NOT_ATTAINED,
        0.0,
        witness=witness,
        probes=probes,
        notes={"lower_bound": True, "inf_upper_estimate": probes[-1]},
    )


def classify_with_evidence(
    model: Model,
    c: float,
    groundstate: GroundState,
    cfg: SolverConfig | None = None,
    init: Field | str | None = "random",
) -> Evidence:
    if model.dim != groundstate.dim:
        raise ModelError("model and ground state dimensions differ")
    if not c > 0:
        raise DomainError(f"mass must be positive, got {c}")
    cfg = cfg or SolverConfig()
    gs = groundstate
    at_threshold = abs(c - gs.cstar) <= THRESHOLD_TOL * gs.cstar

    if model.kind is ModelKind.NLS and at_threshold:
        # F(Q) = 0: the threshold value is attained by Q itself
        q = scaled_Q_family(gs, c, 1.0).field
        e = energy(model, q)
        if abs(e.total) <= 1e-6 * e.A:
            lam = lagrange_multiplier(model, q)
            return Evidence(Classification.ATTAINED, e.total, lam, notes={"minimizer": "Q"})

    if model.kind is ModelKind.SP_CONFINED:
        witness = cutoff_witness(model, gs, c)
    else:
        witness = scaled_Q_witness(model, gs, c)
    if witness.certified:
        return Evidence(Classification.MINUS_INFINITY, -np.inf, witness=witness)

    if model.kind in (ModelKind.SP, ModelKind.NLS):
        return _zero_evidence(model, c, gs, cfg, witness)

    run_cfg = cfg.tightened() if at_threshold else cfg
    report = minimize_on_sphere(model, c, init, run_cfg, gs.grid)
    if report.status is Status.CONVERGED:
        return Evidence(Classification.ATTAINED, report.energy, report.lagrange, report, witness)
    if report.status is Status.DIVERGED:
        raise DiagnosticError(
            "flow diverged although no divergence witness exists", witness=witness, report=report
        )
    if model.kind is ModelKind.NLS_DECAYING and report.energy >= -INEQUALITY_SLACK:
        # mu below mu_1: the flow spreads out and the value 0 is only approached
        return _zero_evidence(model, c, gs, cfg, witness)
    raise SolverError(
        f"flow ended with status {report.status.value} (residual {report.grad_residual:.2e})"
    )


def classify_infimum(
    model: Model, c: float, groundstate: GroundState, cfg: SolverConfig | None = None
) -> Classification:
    return classify_with_evidence(model, c, groundstate, cfg).classification
