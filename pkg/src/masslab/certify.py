"""The acceptance criteria as executable checks.

Each criterion is a function of a shared :class:`Context` returning a
:class:`CriterionResult`.  Statuses are "pass", "fail", or "xfail" (a
sub-check whose literal form cannot hold for a correct computation; the
report carries the reason).  No timings are recorded, so the serialized
result depends only on the seed and the code.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import erf

from .analysis import continuity_probe, monotonicity_check, scan, small_mass_check, subadditivity_check
from .config import SolverConfig
from .eigen import EigenResult, compute_mu1, constant_weight
from .functionals import Model, Potential, energy, gn_gap, gradient, pohozaev_residual, power_integral
from .grid import Field, build_grid, dilate
from .groundstate import GroundState, certify_gn, solve_ground_state, solve_ground_state_flow
from .hartree import coulomb_potential, hartree_energy
from .minimize import Classification, lagrange_multiplier, minimize_on_sphere

PASS, FAIL, XFAIL = "pass", "fail", "xfail"


@dataclass
class CriterionResult:
    number: str
    title: str
    claim: str
    status: str
    values: dict = field(default_factory=dict)
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def line(self) -> str:
        return f"[{self.status.upper():5}] {self.number:>3} {self.title}"

    def as_dict(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "claim": self.claim,
            "status": self.status,
            "values": self.values,
            "note": self.note,
        }


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


class Context:
    """Lazily computed shared objects (ground states, eigenpairs, scans)."""

    def __init__(self, seed: int = 0, ground_state_loader=None):
        self.seed = seed
        self.cfg = SolverConfig(seed=seed)
        self._loader = ground_state_loader or (lambda dim: solve_ground_state(dim))
        self._gs: dict = {}
        self._scans: dict = {}

    def ground_state(self, dim: int) -> GroundState:
        if dim not in self._gs:
            self._gs[dim] = self._loader(dim)
        return self._gs[dim]

    @cached_property
    def gaussian_eigen(self) -> EigenResult:
        return compute_mu1(Potential.gaussian(), 4.0, 1024, dim=3)

    @cached_property
    def decaying_model(self) -> Model:
        return Model.nls_decaying(3, 1.5 * self.gaussian_eigen.mu1)

    def scan(self, model: Model, fractions):
        key = (model, tuple(fractions))
        if key not in self._scans:
            gs = self.ground_state(model.dim)
            self._scans[key] = scan(model, [f * gs.cstar for f in fractions], gs, self.cfg)
        return self._scans[key]


# ---- criteria --------------------------------------------------------------


def c1_identities(ctx: Context) -> CriterionResult:
    vals, ok = {}, True
    for dim in (1, 2, 3):
        gs = ctx.ground_state(dim)
        res = max(gs.identity_residuals)
        jrel = abs(gs.action_J - gs.cstar / 2.0) / (gs.cstar / 2.0)
        vals[f"N{dim}"] = {"cstar": gs.cstar, "max_identity_residual": res, "J_relative_error": jrel}
        ok &= res <= 1e-6 and jrel <= 1e-6
    return CriterionResult("1", "ground-state identities", "pairwise identity residuals <= 1e-6, J = c*/2", _status(ok), vals)


def c2_closed_form(ctx: Context) -> CriterionResult:
    gs = ctx.ground_state(1)
    x = gs.grid.nodes
    exact_c = math.sqrt(3.0) * math.pi / 2.0
    q_exact = 3.0**0.25 / np.sqrt(np.cosh(2.0 * x))
    dc = abs(gs.cstar - exact_c)
    dq = float(np.max(np.abs(gs.profile.values - q_exact)))
    return CriterionResult(
        "2",
        "closed-form N=1 ground state",
        "c* = sqrt(3) pi / 2 within 1e-8; Q pointwise within 1e-6",
        _status(dc <= 1e-8 and dq <= 1e-6),
        {"cstar": gs.cstar, "cstar_error": dc, "profile_sup_error": dq},
    )


def c3_cross_solver(ctx: Context) -> CriterionResult:
    vals, ok = {}, True
    for dim in (2, 3):
        gs = ctx.ground_state(dim)
        flow = solve_ground_state_flow(dim)
        rel = abs(gs.cstar - flow.cstar) / gs.cstar
        vals[f"N{dim}"] = {"shooting": gs.cstar, "flow": flow.cstar, "relative_difference": rel}
        ok &= rel <= 5e-5
    ok &= f"{ctx.ground_state(2).cstar:.4g}" == "11.7"
    return CriterionResult("3", "cross-solver c*", "shooting and flow agree to 4 significant digits", _status(ok), vals)


def c4_gn(ctx: Context) -> CriterionResult:
    vals, ok = {}, True
    for dim in (1, 2, 3):
        gap = certify_gn(ctx.ground_state(dim))
        vals[f"N{dim}"] = gap
        ok &= abs(gap) <= 1e-5
    gs = ctx.ground_state(3)
    gauss = Field.from_function(gs.grid, lambda r: np.exp(-(r**2)))
    g_gap = gn_gap(gauss, gs.cstar)
    vals["gaussian_gap"] = g_gap
    ok &= g_gap > 0
    return CriterionResult("4", "sharp GN constant", "gap(Q) <= 1e-5 relative; gap > 0 for a Gaussian", _status(ok), vals)


def c5_hartree(ctx: Context) -> CriterionResult:
    grid = build_grid(3)
    r = grid.nodes
    u = Field(grid, np.exp(-0.5 * r**2))
    phi = coulomb_potential(u).phi.values
    safe = np.where(r > 0, r, 1.0)
    exact = np.where(r > 0, math.pi**1.5 * erf(r) / safe, 2.0 * math.pi)
    phi_err = float(np.max(np.abs(phi - exact) / exact))

    bump = Field(grid, np.where(r < 1.0, (1.0 - r**2) ** 3, 0.0))
    far = float(grid.r_max * coulomb_potential(bump).phi.values[-1])
    far_err = abs(far - bump.mass) / bump.mass

    b0 = hartree_energy(u)
    scale_err = max(abs(hartree_energy(dilate(u, t)) - t * b0) / (t * b0) for t in (0.5, 2.0, 4.0))
    ok = phi_err <= 1e-6 and far_err <= 1e-4 and scale_err <= 1e-6
    return CriterionResult(
        "5",
        "Hartree potential",
        "erf potential 1e-6; far field 1e-4; B(u^t) = t B(u) 1e-6",
        _status(ok),
        {"phi_relative_error": phi_err, "far_field_error": far_err, "scaling_error": scale_err},
    )


SP_FRACTIONS = (0.5, 0.9, 1.0, 1.1, 1.5)
CONFINED_FRACTIONS = (0.25, 0.5, 0.75, 1.0)


def c6_sp_map(ctx: Context) -> CriterionResult:
    result = ctx.scan(Model.sp(), SP_FRACTIONS)
    expected = [Classification.ZERO_NOT_ATTAINED] * 3 + [Classification.MINUS_INFINITY] * 2
    got = list(result.classifications)
    ok = got == expected
    for ev, k in zip(result.evidence, got):
        if k is Classification.ZERO_NOT_ATTAINED:
            probes = ev["dilation_probe"]
            ok &= bool(ev["notes"].get("lower_bound")) and probes[-1] >= 0 and probes[-1] < 1e-2 * probes[0]
        else:
            ok &= bool(ev["witness"]["certified"])
    return CriterionResult(
        "6",
        "threshold map of E",
        "ZERO at {0.5, 0.9, 1.0} c*, -inf at {1.1, 1.5} c*",
        _status(ok),
        {"fractions": list(SP_FRACTIONS), "classifications": [k.value for k in got]},
    )


def c7_confined_map(ctx: Context) -> CriterionResult:
    model = Model.sp_confined()
    result = ctx.scan(model, CONFINED_FRACTIONS)
    attained = all(k is Classification.ATTAINED for k in result.classifications)
    positive = all(e > 0 for e in result.energies)
    above = ctx.scan(model, (1.2,))
    witness = above.evidence[0].get("witness", {})
    ok = attained and positive and above.classifications[0] is Classification.MINUS_INFINITY and witness.get("certified")
    return CriterionResult(
        "7",
        "threshold map of I",
        "attained with I_c > 0 up to c*; cut-off witness -inf at 1.2 c*",
        _status(bool(ok)),
        {
            "fractions": list(CONFINED_FRACTIONS),
            "energies": list(result.energies),
            "classifications": [k.value for k in result.classifications],
            "above_threshold": above.classifications[0].value,
            "witness_final_energy": witness.get("energies", [None])[-1],
        },
    )


def c8_curve(ctx: Context) -> list:
    model = Model.sp_confined()
    gs = ctx.ground_state(3)
    mono = monotonicity_check(ctx.scan(model, CONFINED_FRACTIONS), ctx.cfg)
    small = small_mass_check(model, [f * gs.cstar for f in (0.05, 0.1, 0.2)], gs, ctx.cfg)
    cont = continuity_probe(model, 0.6 * gs.cstar, (0.1, 0.05, 0.01), ctx.cfg, gs)
    out = [
        CriterionResult(
            "8a",
            "I_c/c^2 strictly decreasing",
            "margins > 10x solver tolerance",
            _status(mono.passed),
            {"ratios": list(mono.ratios), "margins": list(mono.margins), "required": list(mono.required)},
        ),
        CriterionResult(
            "8b",
            "small-mass limit",
            "I_c decreases toward 0 over {0.05, 0.1, 0.2} c*",
            _status(small.passed),
            {"energies": list(small.energies), "I_over_c": list(small.slopes)},
        ),
        CriterionResult(
            "8c",
            "continuity at 0.6 c* (differences shrink with delta)",
            "differences decrease and scale like delta",
            _status(cont.consistent_with_continuity),
            {"deltas": list(cont.deltas), "differences": list(cont.differences)},
        ),
        CriterionResult(
            "8d",
            "continuity at 0.6 c* (literal tolerance bound)",
            "smallest difference below 10x solver tolerance x |I_c|",
            PASS if cont.literal_pass else XFAIL,
            {"smallest_difference": min(cont.differences), "bound": cont.literal_bound},
            note="I_c has nonzero slope, so |I_{c+d} - I_c| ~ d |I'(c)| cannot fall below a fixed tolerance at d = 0.01 c",
        ),
    ]
    return out


def c9_nls(ctx: Context) -> CriterionResult:
    vals, ok = {}, True
    for dim in (1, 2, 3):
        gs = ctx.ground_state(dim)
        model = Model.nls(dim)
        e = energy(model, gs.profile)
        lam = lagrange_multiplier(model, gs.profile)
        p = model.exponent
        pw = power_integral(gs.profile, p)
        r53 = abs(pw + 0.5 * (dim + 2) * lam * gs.cstar) / pw
        r52 = abs(pohozaev_residual(model, gs.profile, lam)) / pw
        vals[f"N{dim}"] = {"F_over_A": e.total / e.A, "lambda": lam, "eq53_residual": r53, "pohozaev_residual": r52}
        ok &= abs(e.total) <= 1e-6 * e.A and abs(lam + 1.0) <= 1e-5 and r53 <= 1e-5
    result = ctx.scan(Model.nls(3), SP_FRACTIONS)
    got = list(result.classifications)
    # value 0 for c <= c*: below c* not attained, at c* attained by Q with F(Q) = 0
    ok &= got[:2] == [Classification.ZERO_NOT_ATTAINED] * 2
    ok &= got[2] is Classification.ATTAINED and abs(result.energies[2]) <= 1e-6 * ctx.ground_state(3).integrals["grad2"]
    ok &= got[3:] == [Classification.MINUS_INFINITY] * 2
    vals["classifications"] = [k.value for k in got]
    vals["energies"] = [float(x) for x in result.energies]
    return CriterionResult(
        "9",
        "plain NLS at threshold",
        "F(Q) = 0; value 0 for c <= c*, -inf above; lambda(Q) = -1; identity residual <= 1e-5",
        _status(bool(ok)),
        vals,
    )


def c10_decaying(ctx: Context) -> CriterionResult:
    vals, ok = {}, True
    ball = compute_mu1(constant_weight(), 4.0, 1024, dim=3)
    mu_err = abs(ball.mu1 - math.pi**2 / 16.0) / (math.pi**2 / 16.0)
    vals["mu1_ball_error"] = mu_err
    ok &= mu_err <= 1e-6
    eig = ctx.gaussian_eigen
    model = ctx.decaying_model
    gs = ctx.ground_state(3)
    vals["mu1_gaussian"] = eig.mu1
    result = ctx.scan(model, (0.2, 0.5, 0.8))
    entries = []
    for c, ev, k in zip(result.c_values, result.evidence, result.classifications):
        e = ev.get("energy")
        lam = ev.get("lagrange")
        entry = {"c": c, "energy": e, "lambda": lam, "classification": k.value}
        if k is Classification.ATTAINED:
            rep = ev["report"]
            # lambda c = 2 F - 2/(N+2) int |u|^p, on the converged minimizer
            entry["status"] = rep["status"]
        entries.append(entry)
        ok &= k is Classification.ATTAINED and e < 0 and lam < 0
    vals["entries"] = entries
    ident = []
    for c in result.c_values:
        rep = minimize_on_sphere(model, c, "random", ctx.cfg, gs.grid)
        u = rep.minimizer
        lam = lagrange_multiplier(model, u)
        rhs = 2.0 * energy(model, u).total - 2.0 / (model.dim + 2.0) * power_integral(u, model.exponent)
        ident.append(abs(lam * c - rhs) / abs(rhs))
    vals["lambda_identity_residuals"] = ident
    ok &= max(ident) <= 1e-5
    c = 0.8 * gs.cstar
    sub = subadditivity_check(model, c, [a * c for a in (0.2, 0.4, 0.6)], gs, eig, ctx.cfg, theta=1.25)
    vals["subadditivity_gaps"] = list(sub.gaps)
    vals["subadditivity_margins"] = list(sub.margins)
    vals["theta_check"] = sub.theta_check
    ok &= sub.passed and sub.theta_check["strict"] and sub.theta_check["minimized_strict"]
    ok &= sub.theta_check["identity_residual"] <= 1e-10
    return CriterionResult(
        "10",
        "decaying potential: mu_1, f_mu < 0, lambda < 0, subadditivity",
        "mu_1 ball oracle 1e-6; f_mu(c) < 0; lambda_c < 0; strict subadditivity; theta scaling",
        _status(bool(ok)),
        vals,
    )


def fd_check(model: Model, grid, pairs: int = 10, seed: int = 0, eps: float = 1e-5) -> list:
    """Relative errors between <gradient, v> and central differences."""
    rng = np.random.default_rng(seed)
    r = grid.nodes
    errors = []
    for _ in range(pairs):
        amp, width, freq = rng.uniform(0.5, 2.0), rng.uniform(0.6, 2.0), rng.uniform(0.5, 3.0)
        u = Field(grid, grid.complete(amp * np.exp(-((r / width) ** 2)) * (1.0 + 0.3 * np.cos(freq * r))))
        center, spread = rng.uniform(0.0, 3.0), rng.uniform(0.5, 1.5)
        v = grid.complete(rng.normal() * np.exp(-(((r - center) / spread) ** 2)))
        plus = energy(model, u.with_values(u.values + eps * v)).total
        minus = energy(model, u.with_values(u.values - eps * v)).total
        fd = (plus - minus) / (2.0 * eps)
        an = float(grid.weights @ (gradient(model, u).values * v))
        errors.append(abs(fd - an) / max(abs(fd), abs(an), 1e-300))
    return errors


def c11_gradients(ctx: Context) -> CriterionResult:
    models = {
        "SP": Model.sp(),
        "SP_CONFINED": Model.sp_confined(),
        "NLS": Model.nls(3),
        "NLS_DECAYING": ctx.decaying_model,
    }
    vals, ok = {}, True
    grid = build_grid(3)
    for i, (name, model) in enumerate(models.items()):
        errs = fd_check(model, grid, 10, ctx.seed + i)
        vals[name] = max(errs)
        ok &= max(errs) <= 1e-5
    return CriterionResult("11", "gradients vs finite differences", "10 random pairs per model within 1e-5", _status(ok), vals)


def c12_determinism(ctx: Context) -> CriterionResult:
    """Re-run a scan and the gradient oracle in a fresh context; compare bytes."""

    def payload():
        fresh = Context(ctx.seed, ctx._loader)
        fresh._gs = dict(ctx._gs)
        return to_json([c6_sp_map(fresh), c11_gradients(fresh)], ctx.seed)

    first, second = payload(), payload()
    return CriterionResult(
        "12",
        "determinism",
        "identical serialized results for the same seed",
        _status(first == second),
        {"bytes": len(first)},
    )


CRITERIA = {
    "1": c1_identities,
    "2": c2_closed_form,
    "3": c3_cross_solver,
    "4": c4_gn,
    "5": c5_hartree,
    "6": c6_sp_map,
    "7": c7_confined_map,
    "8": c8_curve,
    "9": c9_nls,
    "10": c10_decaying,
    "11": c11_gradients,
    "12": c12_determinism,
}


def run_criteria(ctx: Context, only=None) -> list:
    results = []
    for key, fn in CRITERIA.items():
        if only and key not in only:
            continue
        out = fn(ctx)
        results.extend(out if isinstance(out, list) else [out])
    return results


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def to_json(results, seed: int, extra: dict | None = None) -> str:
    doc = {"seed": seed, "criteria": [r.as_dict() for r in results]}
    if extra:
        doc.update(extra)
    return json.dumps(_clean(doc), indent=2, sort_keys=True)
