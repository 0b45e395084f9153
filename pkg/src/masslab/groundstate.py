"""The ground state Q of -Delta Q + Q = Q^(1+4/N) and the threshold c* = |Q|_2^2.

The primary solver shoots on Q(0) with a classical RK4 integrator, bisects
between the two failure modes (sign change vs. turning back up), then polishes
the interpolated profile by Newton's method on the discrete equation, so the
returned Q is a solution of the same discretization every energy uses.

A second, independent solver is a normalized gradient flow for the Weinstein
problem (minimize 1/2 int |grad u|^2 + u^2 with int |u|^p fixed), run on a
coarser grid.  It is used only as a cross-check of c*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.sparse.linalg import splu
from scipy.special import k0, k1

from .config import SolverConfig
from .errors import AccuracyError, ConfigurationError, NumericalError, SolverError
from .functionals import gn_gap, kinetic, power_integral
from .grid import Field, RadialGrid, build_grid
from .hartree import hartree_energy

ODE_STEP = 1e-3
BISECTION_TOL = 1e-12
SCAN_RANGE = (0.1, 10.0)
SCAN_FACTOR = 1.05
IDENTITY_TOL = 1e-6
ACCURACY_LIMIT = 1e-4
FORMAT_VERSION = 1

OVERSHOOT, UNDERSHOOT, UNDECIDED = 1, -1, 0


@dataclass(frozen=True)
class GroundState:
    dim: int
    profile: Field
    cstar: float
    identity_residuals: tuple
    action_J: float
    decay_check: float
    integrals: dict = field(default_factory=dict)

    @property
    def grid(self) -> RadialGrid:
        return self.profile.grid

    @property
    def exponent(self) -> float:
        return (2.0 * self.dim + 4.0) / self.dim

    def summary(self) -> dict:
        return {
            "dim": self.dim,
            "grid": self.grid.describe(),
            "cstar": self.cstar,
            "identity_residuals": list(self.identity_residuals),
            "action_J": self.action_J,
            "decay_check": self.decay_check,
            "Q0": float(self.profile.values[0]),
        }


# ---- shooting ---------------------------------------------------------------


def _shoot(a: float, dim: int, r_end: float = 60.0, record: bool = False):
    """Integrate Q'' = -(N-1)/r Q' + Q - Q^(p-1) from Q(0) = a, Q'(0) = 0.

    Returns (verdict, trace); trace holds (r, Q, Q') when ``record``.
    """
    p1 = 1.0 + 4.0 / dim
    k = dim - 1.0
    h = ODE_STEP

    def rhs(r, q, dq):
        nl = q - math.copysign(abs(q) ** p1, q)
        if r == 0.0:
            return nl / dim
        return nl - k * dq / r

    r, q, dq = 0.0, a, 0.0
    trace = [(r, q, dq)] if record else None
    steps = int(round(r_end / h))
    for i in range(steps):
        k1q, k1d = dq, rhs(r, q, dq)
        k2q, k2d = dq + 0.5 * h * k1d, rhs(r + 0.5 * h, q + 0.5 * h * k1q, dq + 0.5 * h * k1d)
        k3q, k3d = dq + 0.5 * h * k2d, rhs(r + 0.5 * h, q + 0.5 * h * k2q, dq + 0.5 * h * k2d)
        k4q, k4d = dq + h * k3d, rhs(r + h, q + h * k3q, dq + h * k3d)
        q += h * (k1q + 2 * k2q + 2 * k3q + k4q) / 6.0
        dq += h * (k1d + 2 * k2d + 2 * k3d + k4d) / 6.0
        r = (i + 1) * h
        if record:
            trace.append((r, q, dq))
        if q < 0.0:
            return OVERSHOOT, trace
        if dq > 0.0:
            return UNDERSHOOT, trace
    return UNDECIDED, trace


def shoot_initial_value(dim: int) -> tuple[float, float]:
    """Bracket [a_lo, a_hi] around Q(0) of width <= BISECTION_TOL."""
    lo_a, hi_a = SCAN_RANGE
    a = lo_a
    prev = None
    while a <= hi_a:
        verdict, _ = _shoot(a, dim)
        if verdict == OVERSHOOT:
            if prev is None:
                raise SolverError(f"shooting overshoots already at Q(0) = {a}")
            break
        prev = a
        a *= SCAN_FACTOR
    else:
        raise SolverError(f"no shooting bracket found in Q(0) in {SCAN_RANGE}")
    lo, hi = prev, a
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        verdict, _ = _shoot(mid, dim)
        if verdict == OVERSHOOT:
            hi = mid
        elif verdict == UNDERSHOOT:
            lo = mid
        else:
            break
    return lo, hi


def _tail(dim: int, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decaying solution of -v'' - (N-1)/r v' + v = 0 and its derivative."""
    if dim == 1:
        return np.exp(-r), -np.exp(-r)
    if dim == 2:
        return k0(r), -k1(r)
    return np.exp(-r) / r, -np.exp(-r) * (1.0 / r + 1.0 / r**2)


def _shooting_profile(dim: int, grid: RadialGrid) -> np.ndarray:
    lo, hi = shoot_initial_value(dim)
    _, low = _shoot(lo, dim, record=True)
    _, high = _shoot(hi, dim, record=True)
    n = min(len(low), len(high))
    low = np.asarray(low[:n])
    high = np.asarray(high[:n])
    r, q, dq = low.T
    # trust the shot while the two bracketing trajectories agree
    split = np.flatnonzero(np.abs(q - high[:, 1]) > 1e-9 * lo)
    stop = split[0] if split.size else n
    good = np.flatnonzero((q[:stop] > 1e-5 * lo) & (dq[:stop] < 0.0))
    m = good[-1]
    r_match = r[m]
    x = grid.nodes
    out = np.empty_like(x)
    inside = x <= r_match
    out[inside] = CubicHermiteSpline(r[: m + 1], q[: m + 1], dq[: m + 1])(x[inside])
    t0, _ = _tail(dim, np.array([r_match]))
    out[~inside] = q[m] * _tail(dim, x[~inside])[0] / t0[0]
    return out


def _newton_polish(grid: RadialGrid, q: np.ndarray, max_steps: int = 40) -> np.ndarray:
    """Solve K q + W q - W q^(p-1) = 0 on the free nodes."""
    p = (2.0 * grid.dim + 4.0) / grid.dim
    idx = np.flatnonzero(grid.free)
    w = grid.weights[idx]
    k = grid.stiffness[idx][:, idx]
    u = grid.complete(q)
    scale = float(np.sqrt(grid.weights @ u**2))
    for _ in range(max_steps):
        uf = u[idx]
        res = k @ uf + w * uf - w * np.abs(uf) ** (p - 2.0) * uf
        norm = float(np.sqrt(np.sum(res**2 / w)))
        if not np.isfinite(norm):
            raise NumericalError("Newton iteration produced non-finite values")
        if norm <= 1e-13 * scale:
            return u
        jac = k + sp.diags(w * (1.0 - (p - 1.0) * np.abs(uf) ** (p - 2.0)))
        u[idx] = uf - splu(jac.tocsc()).solve(res)
        u = grid.complete(u)
    if norm > 1e-10 * scale:
        raise SolverError(f"Newton polish did not converge (residual {norm:.3e})")
    return u


def _decay_slope(field: Field) -> float:
    """Fitted slope of log(r^((N-1)/2) Q) on [r_max/2, 3 r_max/4]; tends to -1."""
    grid = field.grid
    r = grid.nodes
    win = (r >= 0.5 * grid.r_max) & (r <= 0.75 * grid.r_max) & (field.values > 0)
    y = np.log(field.values[win]) + 0.5 * (grid.dim - 1) * np.log(r[win])
    return float(np.polyfit(r[win], y, 1)[0])


def _assemble(dim: int, grid: RadialGrid, q: np.ndarray, check: bool = True) -> GroundState:
    profile = Field(grid, q, {"kind": "ground_state"})
    n = dim
    p = (2.0 * n + 4.0) / n
    grad2 = 2.0 * kinetic(profile)
    mass = profile.mass
    powr = power_integral(profile, p)
    a, b, c = powr, (n + 2.0) / n * grad2, (n + 2.0) / 2.0 * mass
    residuals = (abs(a - b) / a, abs(a - c) / a, abs(b - c) / a)
    action_j = 0.5 * (grad2 + mass) - powr / p
    gs = GroundState(
        dim=dim,
        profile=profile,
        cstar=mass,
        identity_residuals=residuals,
        action_J=action_j,
        decay_check=_decay_slope(profile),
        integrals={"grad2": grad2, "mass": mass, "power": powr},
    )
    if check and max(residuals) > ACCURACY_LIMIT:
        raise AccuracyError(f"identity residuals {residuals} exceed {ACCURACY_LIMIT}; refine the grid")
    return gs


def solve_ground_state(
    dim: int, cfg: SolverConfig | None = None, grid: RadialGrid | None = None
) -> GroundState:
    """Shooting + Newton ground state on ``grid`` (default resolution if None).

    ``cfg`` is accepted for interface symmetry with the flow solvers; the
    shooting tolerances are fixed constants.
    """
    if dim not in (1, 2, 3):
        raise ConfigurationError(f"dim must be 1, 2 or 3, got {dim}")
    grid = grid or build_grid(dim)
    if grid.dim != dim:
        raise ConfigurationError("grid dimension does not match dim")
    guess = _shooting_profile(dim, grid)
    q = _newton_polish(grid, guess)
    if np.any(q[:-1] <= 0) or np.any(np.diff(q) >= 0):
        raise SolverError("polished profile is not positive and decreasing")
    return _assemble(dim, grid, q)


# ---- normalized gradient flow (cross-check) -------------------------------


def solve_ground_state_flow(
    dim: int,
    grid: RadialGrid | None = None,
    tau: float = 2.0,
    max_iter: int = 20000,
    tol: float = 1e-11,
) -> GroundState:
    """Ground state from the normalized gradient flow of the Weinstein problem.

    Step: (W + tau (K + W)) v = W (u + tau Lambda u^(p-1)), then rescale v so
    int |v|^p = 1.  At the fixed point -Delta u + u = Lambda u^(p-1) and
    Q = Lambda^(1/(p-2)) u.
    """
    if grid is None:
        points, r_max = {1: (2048, 20.0), 2: (1024, 16.0), 3: (1024, 16.0)}[dim]
        grid = build_grid(dim, r_max, points)
    p = (2.0 * dim + 4.0) / dim
    idx = np.flatnonzero(grid.free)
    w = grid.weights
    solve = grid.shifted_solver((1.0 + tau) / tau)

    def lp_normalize(v):
        return v / float(w @ np.abs(v) ** p) ** (1.0 / p)

    u = lp_normalize(grid.complete(np.exp(-0.5 * grid.nodes**2)))
    lam = 0.0
    for it in range(max_iter):
        lam = float(u @ (grid.stiffness @ u) + w @ u**2)
        rhs = w * (u + tau * lam * np.abs(u) ** (p - 2.0) * u)
        v = np.zeros_like(u)
        v[idx] = solve(rhs[idx] / tau)
        v = lp_normalize(grid.complete(v))
        if not np.all(np.isfinite(v)):
            raise NumericalError("flow produced non-finite values")
        change = float(np.max(np.abs(v - u)))
        u = v
        if change < tol:
            break
    else:
        raise SolverError(f"flow did not converge in {max_iter} iterations (last change {change:.2e})")
    q = lam ** (1.0 / (p - 2.0)) * u
    return _assemble(dim, grid, q, check=False)


def cross_check(gs: GroundState, other: GroundState) -> dict:
    """Relative c* difference and sup distance of the two profiles on gs's grid."""
    spline = CubicSpline(other.grid.nodes, other.profile.values)
    x = gs.grid.nodes
    inside = x <= other.grid.r_max
    other_on = np.where(inside, spline(np.minimum(x, other.grid.r_max)), 0.0)
    return {
        "cstar_primary": gs.cstar,
        "cstar_flow": other.cstar,
        "relative_difference": abs(gs.cstar - other.cstar) / gs.cstar,
        "sup_distance": float(np.max(np.abs(gs.profile.values - other_on))),
    }


# ---- derived quantities ----------------------------------------------------


def action(groundstate: GroundState) -> float:
    """J(u) = 1/2 int (|grad u|^2 + u^2) - N/(2N+4) int |u|^p evaluated at Q."""
    return action_of(groundstate.profile)


def action_of(u: Field) -> float:
    n = u.grid.dim
    p = (2.0 * n + 4.0) / n
    return kinetic(u) + 0.5 * u.mass - power_integral(u, p) / p


def certify_gn(groundstate: GroundState) -> float:
    """Relative GN gap at Q (zero for the optimizer)."""
    gap = gn_gap(groundstate.profile, groundstate.cstar)
    return gap / groundstate.integrals["power"]


def hartree_of_Q(groundstate: GroundState) -> float:
    return hartree_energy(groundstate.profile)


# ---- persistence -----------------------------------------------------------


def save_ground_state(gs: GroundState, path) -> Path:
    """Text file: '#' header lines (key = value) followed by 'r Q' columns."""
    path = Path(path)
    head = [
        f"# masslab ground state, format {FORMAT_VERSION}",
        f"# dim = {gs.dim}",
        f"# r_max = {gs.grid.r_max!r}",
        f"# points = {gs.grid.points}",
        f"# cstar = {gs.cstar!r}",
        f"# action_J = {gs.action_J!r}",
        "# identity_residuals = " + " ".join(repr(x) for x in gs.identity_residuals),
        "# columns = r Q",
    ]
    body = [f"{r!r} {q!r}" for r, q in zip(gs.grid.nodes.tolist(), gs.profile.values.tolist())]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(head + body) + "\n")
    return path


def load_ground_state(path) -> GroundState:
    header = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            if "=" in line:
                key, value = line[1:].split("=", 1)
                header[key.strip()] = value.strip()
            continue
        if line.strip():
            rows.append([float(x) for x in line.split()])
    try:
        dim = int(header["dim"])
        grid = build_grid(dim, float(header["r_max"]), int(header["points"]))
    except (KeyError, ValueError) as exc:
        raise ConfigurationError(f"malformed ground-state file {path}: {exc}") from exc
    data = np.asarray(rows)
    if data.shape != (grid.points, 2) or not np.allclose(data[:, 0], grid.nodes, rtol=0, atol=1e-12):
        raise ConfigurationError(f"ground-state file {path} does not match its header grid")
    return _assemble(dim, grid, data[:, 1])
