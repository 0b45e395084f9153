"""Curve-level checks: threshold scans, monotonicity of I_c/c^2, continuity,
small-mass limit, strict subadditivity and coercivity.

Every check returns a small report dataclass; inequalities are asserted with
margins tied to the solver tolerance because the infima are computed, not
known.  A continuity report says "consistent with continuity", nothing more.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import SolverConfig
from .eigen import EigenResult
from .errors import DomainError, InapplicableError, MasslabError, SolverError
from .families import mass_scale, scaled_Q_family
from .functionals import INEQUALITY_SLACK, Model, ModelKind, energy, power_integral
from .groundstate import GroundState
from .minimize import (
    Classification,
    MinimizeReport,
    Status,
    classify_with_evidence,
    minimize_on_sphere,
)


@dataclass(frozen=True)
class ScanResult:
    model: Model
    c_values: tuple
    energies: tuple
    classifications: tuple
    lagranges: tuple
    evidence: tuple = ()
    metadata: dict = field(default_factory=dict)

    def rows(self):
        for i, c in enumerate(self.c_values):
            ev = self.evidence[i] if self.evidence else {}
            iters = ev.get("report", {}).get("iterations", 0)
            yield c, self.energies[i], self.classifications[i], self.lagranges[i], iters

    def describe(self) -> dict:
        return {
            "model": self.model.describe(),
            "c_values": list(self.c_values),
            "energies": list(self.energies),
            "classifications": [k.value for k in self.classifications],
            "lagranges": list(self.lagranges),
            "evidence": list(self.evidence),
            "metadata": dict(self.metadata),
        }


def scan(
    model: Model,
    c_grid,
    groundstate: GroundState,
    cfg: SolverConfig | None = None,
    workers: int = 1,
) -> ScanResult:
    """Classify the infimum at every c; results are ordered by index."""
    cs = [float(c) for c in c_grid]
    if not cs or any(c <= 0 for c in cs):
        raise DomainError("c_grid must be non-empty and positive")
    if any(b <= a for a, b in zip(cs, cs[1:])):
        raise DomainError("c_grid must be strictly increasing")
    cfg = cfg or SolverConfig()

    def one(c):
        try:
            return classify_with_evidence(model, c, groundstate, cfg)
        except MasslabError as exc:
            raise SolverError(f"scan failed at c = {c!r}: {exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, cs))
    else:
        results = [one(c) for c in cs]
    lagranges = tuple(float("nan") if ev.lagrange is None else ev.lagrange for ev in results)
    return ScanResult(
        model=model,
        c_values=tuple(cs),
        energies=tuple(ev.energy for ev in results),
        classifications=tuple(ev.classification for ev in results),
        lagranges=lagranges,
        evidence=tuple(ev.describe() for ev in results),
        metadata={
            "solver": cfg.describe(),
            "grid": groundstate.grid.describe(),
            "cstar": groundstate.cstar,
        },
    )


def threshold_structure_ok(result: ScanResult) -> bool:
    """No finite (ZERO / ATTAINED) entry above a MINUS_INFINITY entry."""
    seen = False
    for k in result.classifications:
        if k is Classification.MINUS_INFINITY:
            seen = True
        elif seen:
            return False
    return True


# ---- monotonicity and small mass ------------------------------------------


@dataclass(frozen=True)
class MonotonicityReport:
    c_values: tuple
    ratios: tuple
    margins: tuple
    required: tuple
    passed: bool


def _energy_tol(cfg: SolverConfig, e: float) -> float:
    return cfg.grad_tol * max(abs(e), 1.0)


def monotonicity_check(result: ScanResult, cfg: SolverConfig | None = None, factor: float = 10.0) -> MonotonicityReport:
    """I_c / c^2 strictly decreasing over the attained entries of an SP_CONFINED scan."""
    cfg = cfg or SolverConfig(**result.metadata.get("solver", {}))
    if result.model.kind is not ModelKind.SP_CONFINED:
        raise InapplicableError("monotonicity of I_c/c^2 concerns the confined SP model")
    cs = list(result.c_values)
    if len(set(cs)) != len(cs):
        raise DomainError("duplicate masses in the scan")
    picked = [
        (c, e)
        for c, e, k in zip(cs, result.energies, result.classifications)
        if k is Classification.ATTAINED
    ]
    if len(picked) < 2:
        raise InapplicableError("need at least two attained entries")
    ratios = [e / c**2 for c, e in picked]
    tols = [_energy_tol(cfg, e) / c**2 for c, e in picked]
    margins = [a - b for a, b in zip(ratios, ratios[1:])]
    required = [factor * (s + t) for s, t in zip(tols, tols[1:])]
    passed = all(m > q for m, q in zip(margins, required))
    return MonotonicityReport(tuple(c for c, _ in picked), tuple(ratios), tuple(margins), tuple(required), passed)


@dataclass(frozen=True)
class SmallMassReport:
    c_values: tuple
    energies: tuple
    slopes: tuple
    passed: bool


def small_mass_check(model: Model, c_values, groundstate: GroundState, cfg: SolverConfig | None = None) -> SmallMassReport:
    """I_c > 0 decreases as c decreases and I_c / c stays bounded, so I_c -> 0."""
    cfg = cfg or SolverConfig()
    cs = sorted(float(c) for c in c_values)
    es = []
    for c in cs:
        rep = minimize_on_sphere(model, c, "random", cfg, groundstate.grid)
        if rep.status is not Status.CONVERGED:
            raise SolverError(f"flow did not converge at c = {c}")
        es.append(rep.energy)
    slopes = [e / c for c, e in zip(cs, es)]
    passed = (
        all(e > 0 for e in es)
        and all(b > a for a, b in zip(es, es[1:]))
        and slopes[0] <= slopes[-1] * (1.0 + cfg.grad_tol)
    )
    return SmallMassReport(tuple(cs), tuple(es), tuple(slopes), bool(passed))


# ---- continuity ------------------------------------------------------------


@dataclass(frozen=True)
class ContinuityReport:
    c: float
    energy: float
    deltas: tuple
    differences: tuple
    decreasing: bool
    lipschitz_consistent: bool
    literal_bound: float
    literal_pass: bool

    @property
    def consistent_with_continuity(self) -> bool:
        return self.decreasing and self.lipschitz_consistent


def continuity_probe(
    model: Model,
    c: float,
    deltas=(0.1, 0.05, 0.01),
    cfg: SolverConfig | None = None,
    groundstate: GroundState | None = None,
) -> ContinuityReport:
    """|I_{c +- delta c} - I_c| for shrinking delta.

    Two readings are reported.  ``literal_pass``: the smallest difference is
    below 10 x solver tolerance x |I_c|.  ``consistent_with_continuity``: the
    differences decrease and the smallest is at most 10 (delta_min) max(|I_c|, 1),
    i.e. they shrink in proportion to delta.
    """
    cfg = cfg or SolverConfig()
    grid = groundstate.grid if groundstate is not None else None
    cstar = groundstate.cstar if groundstate is not None else np.inf
    cache = {}

    def value(m):
        key = round(m, 12)
        if key not in cache:
            rep = minimize_on_sphere(model, m, "random", cfg, grid)
            if rep.status is not Status.CONVERGED:
                raise InapplicableError(f"infimum not attained (flow status {rep.status.value}) at c = {m}")
            cache[key] = rep.energy
        return cache[key]

    base = value(c)
    diffs = []
    for d in deltas:
        if d == 0:
            diffs.append(0.0)
            continue
        sides = [abs(value(c * (1.0 - d)) - base)]
        if c * (1.0 + d) <= cstar:
            sides.append(abs(value(c * (1.0 + d)) - base))
        diffs.append(max(sides))
    order = np.argsort(deltas)[::-1]
    seq = [diffs[i] for i in order]
    decreasing = all(b < a for a, b in zip(seq, seq[1:]))
    d_min = min(deltas)
    lipschitz = seq[-1] <= 10.0 * d_min * max(abs(base), 1.0)
    literal = 10.0 * cfg.grad_tol * max(abs(base), 1.0)
    return ContinuityReport(
        c, base, tuple(deltas), tuple(diffs), bool(decreasing), bool(lipschitz), literal, bool(seq[-1] <= literal)
    )


# ---- subadditivity ---------------------------------------------------------


@dataclass(frozen=True)
class SubadditivityReport:
    c: float
    alphas: tuple
    f_c: float
    rhs: tuple
    gaps: tuple
    margins: tuple
    passed: bool
    inconclusive: bool
    symmetric_pairs: tuple
    theta: float
    theta_check: dict


def _require_decaying(model: Model, eig: EigenResult | None):
    if model.kind is not ModelKind.NLS_DECAYING:
        raise InapplicableError("subadditivity is checked for the decaying NLS model")
    if eig is not None and model.mu < eig.mu1:
        raise InapplicableError(f"mu = {model.mu} is below mu_1 = {eig.mu1}")


def theta_scaling(model: Model, report: MinimizeReport, theta: float) -> dict:
    """F(sqrt(theta) u) - theta F(u) against N/(2N+4)(theta - theta^((N+2)/N)) int |u|^p."""
    u = report.minimizer
    n = model.dim
    p = model.exponent
    f_u = energy(model, u).total
    f_scaled = energy(model, mass_scale(u, theta)).total
    predicted = n / (2.0 * n + 4.0) * (theta - theta ** ((n + 2.0) / n)) * power_integral(u, p)
    diff = f_scaled - theta * f_u
    return {
        "theta": theta,
        "c": report.mass_c,
        "f_c": f_u,
        "F_scaled": f_scaled,
        "difference": diff,
        "predicted": predicted,
        "identity_residual": abs(diff - predicted) / max(abs(predicted), 1e-300),
        "strict": bool(diff < 0),
    }


def subadditivity_check(
    model: Model,
    c: float,
    alphas,
    groundstate: GroundState,
    eig: EigenResult | None = None,
    cfg: SolverConfig | None = None,
    theta: float = 1.25,
    factor: float = 3.0,
) -> SubadditivityReport:
    """f(c) < f(alpha) + f(c - alpha) with margin factor x summed tolerances.

    The theta ingredient f(theta m) < theta f(m) is checked at m = c / theta,
    comparing the minimized f(c) with theta f(c / theta) and the exact scaling
    identity on the minimizer at c / theta.
    """
    _require_decaying(model, eig)
    if not 0 < c < groundstate.cstar:
        raise InapplicableError("need 0 < c < c*")
    cfg = cfg or SolverConfig()
    cache: dict = {}

    def solve(m):
        key = round(m, 12)
        if key not in cache:
            cache[key] = minimize_on_sphere(model, m, "random", cfg, groundstate.grid)
        return cache[key]

    alphas = tuple(float(a) for a in alphas)
    if any(not 0 < a < c for a in alphas):
        raise DomainError("every alpha must satisfy 0 < alpha < c")
    reports = [solve(c)] + [solve(a) for a in alphas] + [solve(c - a) for a in alphas]
    inconclusive = any(r.status is not Status.CONVERGED for r in reports)
    f_c = solve(c).energy
    rhs, gaps, margins = [], [], []
    for a in alphas:
        fa, fb = solve(a).energy, solve(c - a).energy
        rhs.append(fa + fb)
        gaps.append(fa + fb - f_c)
        margins.append(factor * sum(_energy_tol(cfg, e) for e in (f_c, fa, fb)))
    passed = not inconclusive and all(g > m for g, m in zip(gaps, margins))
    pairs = []
    for i, a in enumerate(alphas):
        for j, b in enumerate(alphas):
            if i < j and abs(a + b - c) <= 1e-12 * c:
                pairs.append((a, b, abs(rhs[i] - rhs[j])))
    small = solve(c / theta)
    tcheck = theta_scaling(model, small, theta)
    tcheck["f_theta_c"] = f_c
    tcheck["theta_f_c_over_theta"] = theta * small.energy
    tcheck["minimized_strict"] = bool(f_c < theta * small.energy)
    return SubadditivityReport(
        c=c,
        alphas=alphas,
        f_c=f_c,
        rhs=tuple(rhs),
        gaps=tuple(gaps),
        margins=tuple(margins),
        passed=bool(passed),
        inconclusive=bool(inconclusive),
        symmetric_pairs=tuple(pairs),
        theta=theta,
        theta_check=tcheck,
    )


# ---- coercivity ------------------------------------------------------------


@dataclass(frozen=True)
class CoercivityReport:
    c: float
    parameters: tuple
    energies: tuple
    lower_bounds: tuple
    bound_holds: bool
    increasing_tail: bool


def coercivity_probe(model: Model, c: float, groundstate: GroundState, k_max: int = 6, tail: int = 3) -> CoercivityReport:
    """F along the dilations Q^t, t = 2^k: growth and the lower bound
    F >= (1 - (c/c*)^(2/N)) A - mu V0 c / 2."""
    if not 0 < c < groundstate.cstar:
        raise InapplicableError("coercivity holds below the threshold only")
    n = model.dim
    coeff = 1.0 - (c / groundstate.cstar) ** (2.0 / n)
    v0 = model.potential.bound if model.potential is not None else 0.0
    mu = model.mu or 0.0
    ts, es, lbs = [], [], []
    for k in range(k_max + 1):
        t = 2.0**k
        e = energy(model, scaled_Q_family(groundstate, c, t).field)
        ts.append(t)
        es.append(e.total)
        lbs.append(coeff * e.A + e.B - (mu * v0 * c / 2.0 if model.potential_sign < 0 else 0.0))
    holds = all(e >= lb - INEQUALITY_SLACK * max(1.0, abs(lb)) for e, lb in zip(es, lbs))
    last = es[-(tail + 1) :]
    increasing = all(b > a for a, b in zip(last, last[1:]))
    return CoercivityReport(c, tuple(ts), tuple(es), tuple(lbs), bool(holds), bool(increasing))
