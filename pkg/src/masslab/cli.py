"""Command-line front end.

Exit codes: 0 success, 1 numerical failure (a diagnostic JSON object is
written to stdout), 2 usage error.  Every JSON document carries a schema
version and the hash of the configuration that produced its numbers.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import scan
from .certify import Context, run_criteria, to_json, _clean
from .config import SolverConfig
from .eigen import DEFAULT_POINTS, DEFAULT_RADIUS, compute_mu1
from .errors import ConfigurationError, MasslabError
from .families import scaled_Q_family
from .functionals import Model, Potential, energy
from .grid import Field, build_grid
from .groundstate import GroundState, load_ground_state, save_ground_state, solve_ground_state
from .minimize import lagrange_multiplier, minimize_on_sphere

SCHEMA_VERSION = 1
CACHE_ENV = "MASSLAB_CACHE"


class UsageError(Exception):
    pass


# ---- helpers ----------------------------------------------------------------


def config_hash(config: dict) -> str:
    blob = json.dumps(_clean(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _document(command: str, config: dict, result: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "version": __version__,
        "config": config,
        "config_hash": config_hash({"command": command, "version": __version__, **config}),
        "result": result,
    }


def _dump(doc: dict) -> str:
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def parse_potential(spec: str) -> Potential:
    """'harmonic[:a]', 'gaussian[:v0[:width]]' or 'table:FILE' (two columns r V)."""
    kind, _, rest = spec.partition(":")
    args = [a for a in rest.split(":") if a] if rest else []
    try:
        if kind == "harmonic":
            return Potential.harmonic(*map(float, args))
        if kind == "gaussian":
            return Potential.gaussian(*map(float, args))
        if kind == "table":
            if len(args) != 1:
                raise UsageError("table potential needs a file: table:PATH")
            data = np.loadtxt(args[0], ndmin=2)
            return Potential.table(data[:, 0], data[:, 1], confining=False)
    except (ValueError, TypeError, OSError) as exc:
        raise UsageError(f"bad potential {spec!r}: {exc}") from exc
    raise UsageError(f"unknown potential kind {kind!r}")


def parse_floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _grid_key(dim: int, points: int | None, r_max: float | None) -> dict:
    grid = build_grid(dim, r_max, points)
    return {"dim": dim, "points": grid.points, "r_max": grid.r_max}


def get_ground_state(dim: int, points: int | None = None, r_max: float | None = None) -> GroundState:
    """Solve, or load from $MASSLAB_CACHE when a profile for this grid exists."""
    key = _grid_key(dim, points, r_max)
    cache = os.environ.get(CACHE_ENV)
    path = None
    if cache:
        path = Path(cache) / f"groundstate_N{dim}_M{key['points']}_R{key['r_max']!r}.txt"
        if path.exists():
            return load_ground_state(path)
    gs = solve_ground_state(dim, grid=build_grid(dim, r_max, points))
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        save_ground_state(gs, path)
    return gs


def build_model(args) -> Model:
    name = args.model
    if name is None:
        raise UsageError("--model is required")
    dim = args.dim
    if name == "sp":
        if dim != 3:
            raise UsageError("the SP model is three-dimensional")
        return Model.sp()
    if name == "sp_confined":
        if dim != 3:
            raise UsageError("the SP model is three-dimensional")
        return Model.sp_confined(parse_potential(args.potential or "harmonic"))
    if name == "nls":
        return Model.nls(dim)
    if name == "nls_decaying":
        pot = parse_potential(args.potential or "gaussian")
        if args.mu is not None:
            mu = args.mu
        else:
            mu = args.mu_factor * compute_mu1(pot, args.radius, DEFAULT_POINTS, dim=dim).mu1
        return Model.nls_decaying(dim, mu, pot)
    raise UsageError(f"unknown model {name!r}")


def _masses(values, units: str, gs: GroundState) -> list:
    return [v * gs.cstar for v in values] if units == "cstar" else list(values)


def _mass(args, gs: GroundState) -> float:
    if args.mass is None or not args.mass > 0:
        raise UsageError("--mass is required and must be positive")
    return _masses([args.mass], args.units, gs)[0]


def _solver_config(args) -> SolverConfig:
    kw = {"seed": args.seed}
    if getattr(args, "max_iter", None) is not None:
        kw["max_iter"] = args.max_iter
    if getattr(args, "grad_tol", None) is not None:
        kw["grad_tol"] = args.grad_tol
    return SolverConfig(**kw)


def _model_config(args, model: Model, gs: GroundState) -> dict:
    return {
        "model": model.describe(),
        "grid": gs.grid.describe(),
        "seed": args.seed,
        "units": args.units,
    }


def _write_profile(path: str, field: Field, header: dict):
    lines = [f"# {k} = {v!r}" for k, v in header.items()]
    lines += [f"{r:.17g} {u:.17g}" for r, u in zip(field.grid.nodes, field.values)]
    Path(path).write_text("\n".join(lines) + "\n")


# ---- subcommands -------------------------------------------------------------


def cmd_ground_state(args) -> int:
    gs = get_ground_state(args.dim, args.points, args.rmax)
    config = _grid_key(args.dim, args.points, args.rmax)
    result = gs.summary()
    path = args.profile or f"groundstate_N{args.dim}.txt"
    save_ground_state(gs, path)
    result["profile_path"] = str(path)
    _emit(_dump(_document("ground-state", config, result)), args.json)
    return 0


def cmd_energy(args) -> int:
    model = build_model(args)
    gs = get_ground_state(args.dim, args.points, args.rmax)
    c = _mass(args, gs)
    if args.field == "q":
        u = scaled_Q_family(gs, c, args.t).field
    else:
        w = args.width
        u = Field.from_function(gs.grid, lambda r: np.exp(-((r / w) ** 2))).normalized(c)
    e = energy(model, u)
    config = _model_config(args, model, gs) | {"field": args.field, "t": args.t, "width": args.width, "mass": c}
    result = {
        "A": e.A,
        "B": e.B,
        "C": e.C,
        "D": e.D,
        "total": e.total,
        "mass": e.mass,
        "lagrange": lagrange_multiplier(model, u),
    }
    _emit(_dump(_document("energy", config, result)), args.json)
    return 0


def cmd_minimize(args) -> int:
    model = build_model(args)
    gs = get_ground_state(args.dim, args.points, args.rmax)
    c = _mass(args, gs)
    cfg = _solver_config(args)
    report = minimize_on_sphere(model, c, "random", cfg, gs.grid)
    config = _model_config(args, model, gs) | {"mass": c, "solver": cfg.describe()}
    doc = _document("minimize", config, report.describe())
    if args.profile:
        _write_profile(args.profile, report.minimizer, {"config_hash": doc["config_hash"], "mass": c})
        doc["result"]["profile_path"] = args.profile
    _emit(_dump(doc), args.json)
    return 0


CSV_COLUMNS = ("c", "energy", "classification", "lambda", "iterations", "config_hash")


def scan_csv(result, digest: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for c, e, k, lam, it in result.rows():
        writer.writerow([f"{c:.17g}", f"{e:.17g}", k.value, f"{lam:.17g}", it, digest])
    return buf.getvalue()


def cmd_scan(args) -> int:
    model = build_model(args)
    gs = get_ground_state(args.dim, args.points, args.rmax)
    if args.c_grid is None:
        raise UsageError("--c-grid is required")
    values = parse_floats(args.c_grid) if isinstance(args.c_grid, str) else [float(v) for v in args.c_grid]
    if not values or any(v <= 0 for v in values) or any(b <= a for a, b in zip(values, values[1:])):
        raise UsageError("--c-grid must be positive and strictly increasing")
    cs = _masses(values, args.units, gs)
    cfg = _solver_config(args)
    result = scan(model, cs, gs, cfg, workers=args.workers)
    config = _model_config(args, model, gs) | {"c_grid": values, "solver": cfg.describe()}
    doc = _document("scan", config, result.describe())
    if args.csv:
        Path(args.csv).write_text(scan_csv(result, doc["config_hash"]))
    _emit(_dump(doc), args.json)
    return 0


def cmd_mu1(args) -> int:
    pot = parse_potential(args.potential)
    res = compute_mu1(pot, args.radius, args.points or DEFAULT_POINTS, dim=args.dim)
    config = {"potential": pot.describe(), "radius": args.radius, "points": res.grid.points, "dim": args.dim}
    doc = _document("mu1", config, res.describe() | {"iterations": res.iterations})
    path = args.profile or "mu1_eigenfunction.txt"
    _write_profile(path, res.eigenfunction, {"config_hash": doc["config_hash"], "mu1": res.mu1})
    doc["result"]["profile_path"] = path
    _emit(_dump(doc), args.json)
    return 0


def cmd_certify(args) -> int:
    only = set(args.only.split(",")) if args.only else None
    ctx = Context(args.seed, ground_state_loader=get_ground_state)
    results = run_criteria(ctx, only)
    config = {"seed": args.seed, "only": sorted(only) if only else None}
    digest = config_hash({"command": "certify", "version": __version__, **config})
    text = to_json(results, args.seed, {"schema_version": SCHEMA_VERSION, "config_hash": digest}) + "\n"
    if args.json:
        Path(args.json).write_text(text)
    for r in results:
        print(r.line(), file=sys.stderr if not args.json else sys.stdout)
    if not args.json:
        sys.stdout.write(text)
    return 0 if all(r.status != "fail" for r in results) else 1


# ---- parser -----------------------------------------------------------------


def _grid_args(p):
    p.add_argument("--dim", type=int, default=3, choices=(1, 2, 3))
    p.add_argument("--points", type=int, default=None, help="grid points (default: dimension preset)")
    p.add_argument("--rmax", type=float, default=None, help="outer radius (default: dimension preset)")


def _model_args(p):
    p.add_argument("--model", default=None, choices=("sp", "sp_confined", "nls", "nls_decaying"))
    p.add_argument("--potential", default=None, help="harmonic[:a] | gaussian[:v0[:width]] | table:FILE")
    p.add_argument("--mu", type=float, default=None, help="coupling of the decaying potential")
    p.add_argument("--mu-factor", type=float, default=1.5, help="mu as a multiple of mu_1 when --mu is absent")
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS, help="ball radius for mu_1")
    p.add_argument("--units", choices=("cstar", "raw"), default="cstar")
    p.add_argument("--seed", type=int, default=0)


def _solver_args(p):
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--grad-tol", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="masslab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="JSON file of option defaults (keys are option names)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ground-state", help="compute (or load) Q and c*")
    _grid_args(p)
    p.add_argument("--profile", help="profile file (default groundstate_N<dim>.txt)")
    p.add_argument("--json")
    p.set_defaults(func=cmd_ground_state)

    p = sub.add_parser("energy", help="evaluate the energy of a test field")
    _grid_args(p)
    _model_args(p)
    p.add_argument("--mass", type=float, default=None)
    p.add_argument("--field", choices=("q", "gaussian"), default="q")
    p.add_argument("--t", type=float, default=1.0, help="dilation of Q")
    p.add_argument("--width", type=float, default=1.0, help="Gaussian width")
    p.add_argument("--json")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("minimize", help="run the constrained flow at one mass")
    _grid_args(p)
    _model_args(p)
    _solver_args(p)
    p.add_argument("--mass", type=float, default=None)
    p.add_argument("--profile")
    p.add_argument("--json")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("scan", help="classify the infimum over a list of masses")
    _grid_args(p)
    _model_args(p)
    _solver_args(p)
    p.add_argument("--c-grid", default=None, help="comma separated, increasing")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv")
    p.add_argument("--json")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("mu1", help="weighted first Dirichlet eigenvalue on a ball")
    p.add_argument("--dim", type=int, default=3, choices=(1, 2, 3))
    p.add_argument("--potential", default="gaussian")
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--profile", help="eigenfunction file (default mu1_eigenfunction.txt)")
    p.add_argument("--json")
    p.set_defaults(func=cmd_mu1)

    p = sub.add_parser("certify", help="run the acceptance criteria")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", help="comma separated criterion numbers")
    p.add_argument("--json", help="write the report here (the matrix goes to stdout)")
    p.set_defaults(func=cmd_certify)
    return parser


def _apply_config_file(parser, argv, args):
    try:
        data = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    keys = {k.replace("-", "_") for k in data}
    unknown = keys - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in data.items()})
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            args = _apply_config_file(parser, argv, args)
        return args.func(args)
    except (UsageError, ConfigurationError) as exc:
        parser.print_usage(sys.stderr)
        print(f"masslab: error: {exc}", file=sys.stderr)
        return 2
    except MasslabError as exc:
        diag = {
            "schema_version": SCHEMA_VERSION,
            "command": args.command,
            "error": type(exc).__name__,
            "message": str(exc),
            "witnesses": {k: repr(v) for k, v in getattr(exc, "witnesses", {}).items()},
        }
        sys.stdout.write(_dump(diag))
        return 1


if __name__ == "__main__":
    sys.exit(main())
