"""Command-line front end: ``cgcsurf <command> [--config file] [--out dir] [--grid N] [--quiet]``."""

from __future__ import annotations

import os

_threads = os.environ.get("CGC_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import csv  # noqa: E402
import json  # noqa: E402
import logging  # noqa: E402
import math  # noqa: E402
import sys  # noqa: E402
from pathlib import Path  # noqa: E402
from typing import Literal, Optional, Union  # noqa: E402

import numpy as np  # noqa: E402
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator  # noqa: E402

from . import extended  # noqa: E402
from .errors import (BisectionExhausted, BracketFailure, NonConvergence, NotGradientSurjective,  # noqa: E402
                     NotRegular, StepRejected, Wedge)
from .regions import BoundaryFunction  # noqa: E402

log = logging.getLogger("cgcsurf")

COMMANDS = ("solve", "barrier", "triangle", "foliate", "ktime", "verify")
EXIT_OK, EXIT_CONFIG, EXIT_REJECTED, EXIT_NONCONVERGENCE = 0, 1, 2, 3


class ConfigError(Exception):
    pass


class PsiSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    constant: Optional[float] = Field(default=None, gt=0)
    grid: Optional[str] = None

    @model_validator(mode="after")
    def _one(self):
        if (self.constant is None) == (self.grid is None):
            raise ValueError("psi needs exactly one of 'constant' or 'grid'")
        return self


class BarrierSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["hyperboloid", "chord", "revolution", "trough"] = "hyperboloid"
    chord: tuple[float, float] = (-90.0, 90.0)
    a: float = Field(default=0.5, gt=0, le=1)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")
    command: Literal["solve", "barrier", "triangle", "foliate", "ktime", "verify"]
    phi: Union[Literal["dense"], dict, list] = "dense"
    psi: PsiSpec = PsiSpec(constant=1.0)
    grid: int = Field(default=129, ge=9, le=1025)
    levels: int = Field(default=6, ge=1, le=12)
    R: Optional[float] = Field(default=None, gt=0)
    mesh_grid: int = Field(default=65, ge=9)
    tol: float = Field(default=1e-10, gt=0)
    ktime_tol: float = Field(default=1e-4, gt=0)
    K: float = Field(default=1.0, gt=0)
    K_list: list[float] = [0.5, 1.0, 2.0]
    bracket: tuple[float, float] = (0.1, 10.0)
    points: list[tuple[float, float, float]] = [(0.0, 0.0, 1.0)]
    vertices: tuple[float, float, float] = (0.0, 120.0, 240.0)
    values: tuple[float, float, float] = (0.0, 0.0, 0.0)
    barrier: BarrierSpec = BarrierSpec()
    seed: int = 0
    out: Optional[str] = None

    @field_validator("K_list")
    @classmethod
    def _positive(cls, v):
        if not v or min(v) <= 0:
            raise ValueError("K_list must be non-empty and positive")
        return v

    @field_validator("bracket")
    @classmethod
    def _bracket(cls, v):
        if not 0 < v[0] < v[1]:
            raise ValueError("bracket must satisfy 0 < lo < hi")
        return v

    def boundary(self) -> BoundaryFunction:
        return parse_phi(self.phi)


def parse_phi(spec) -> BoundaryFunction:
    if spec == "dense":
        return BoundaryFunction.dense(0.0)
    if isinstance(spec, dict):
        if set(spec) != {"dense"}:
            raise ValueError("phi object form is {\"dense\": value}")
        return BoundaryFunction.dense(extended.parse(spec["dense"]))
    pairs = []
    for item in spec:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ValueError("phi entries are [theta_degrees, value|\"inf\"]")
        pairs.append((float(item[0]), extended.parse(item[1])))
    return BoundaryFunction.from_pairs(pairs, degrees=True)


def _line_of(text: str, key) -> int:
    if text is None or key is None:
        return 1
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return 1


def load_config(path: Optional[str], command: str, overrides: dict) -> RunConfig:
    text, data = None, {}
    if path:
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}: invalid JSON: {e.msg}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path}:1: configuration must be a JSON object")
    if command:
        if "command" in data and data["command"] != command:
            raise ConfigError(f"{path}:{_line_of(text, 'command')}: command {data['command']!r} "
                              f"conflicts with command line {command!r}")
        data["command"] = command
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = RunConfig.model_validate(data)
        cfg.boundary()
    except ValidationError as e:
        err = e.errors()[0]
        key = err["loc"][0] if err["loc"] else None
        loc = ".".join(str(x) for x in err["loc"])
        raise ConfigError(f"{path or '<args>'}:{_line_of(text, key)}: {loc}: {err['msg']}") from e
    except ValueError as e:
        raise ConfigError(f"{path or '<args>'}:{_line_of(text, 'phi')}: phi: {e}") from e
    return cfg


# run directory --------------------------------------------------------------

def _psi(cfg: RunConfig):
    if cfg.psi.constant is not None:
        return cfg.psi.constant
    arr = np.loadtxt(cfg.psi.grid, delimiter=",")
    if arr.shape != (cfg.grid, cfg.grid):
        raise ConfigError(f"psi grid {cfg.psi.grid} has shape {arr.shape}, expected {(cfg.grid, cfg.grid)}")
    return arr


def _write_json(path, obj):
    Path(path).write_text(json.dumps(extended.jsonable(obj), indent=2, sort_keys=True) + "\n")


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([extended.fmt(v) if isinstance(v, (float, int, np.floating)) else v for v in r])


def _radial(field, path):
    t = np.linspace(-1.0, 1.0, 401)
    _write_rows(path, ["s", "u_x_axis", "u_y_axis"],
                zip(t, field.sample(t, np.zeros_like(t)), field.sample(np.zeros_like(t), t)))


def _levels(field, path, count=8):
    """Grid edges crossing each of ``count`` levels, linearly interpolated."""
    V, ax = field.values, field.axis
    fin = np.isfinite(V)
    lo, hi = float(V[fin].min()), float(V[fin].max())
    rows = []
    for c in np.linspace(lo, hi, count + 2)[1:-1]:
        for axis in (0, 1):
            a = V[:-1, :] if axis == 0 else V[:, :-1]
            b = V[1:, :] if axis == 0 else V[:, 1:]
            ok = np.isfinite(a) & np.isfinite(b) & ((a - c) * (b - c) < 0)
            for i, j in zip(*np.nonzero(ok)):
                t = (c - a[i, j]) / (b[i, j] - a[i, j])
                x = ax[i] + t * (ax[1] - ax[0]) if axis == 0 else ax[i]
                y = ax[j] if axis == 0 else ax[j] + t * (ax[1] - ax[0])
                rows.append((c, x, y))
    _write_rows(path, ["level", "x", "y"], rows)


def _emit_solution(sol, out: Path, mesh=None):
    sol.u.to_csv(out / "solution.csv")
    if mesh is not None:
        mesh.to_obj(out / "mesh.obj")
    plot = out / "plotdata"
    plot.mkdir(exist_ok=True)
    _radial(sol.u, plot / "radial.csv")
    _levels(sol.u, plot / "levels.csv")


def _mesh_for(sol, cfg, psi):
    if cfg.R is None:
        return None
    from .convexity import mesh_from_support
    from .masolver.pipeline import curvature_report
    try:
        mesh = mesh_from_support(sol.u, cfg.R, n=cfg.mesh_grid)
    except NotGradientSurjective as e:
        sol.diagnostics["mesh_error"] = str(e)
        return None
    if np.ndim(psi) == 0:
        sol.diagnostics["curvature"] = curvature_report(mesh, psi)
    return mesh


def cmd_solve(cfg: RunConfig, out: Path) -> dict:
    from .barriers import hyperboloid_values
    from .masolver.exhaustion import exhaustion_solve
    phi = cfg.boundary()
    psi = _psi(cfg)
    K = float(psi) if np.ndim(psi) == 0 else None
    sol = exhaustion_solve(phi, psi=psi, levels=cfg.levels, n=cfg.grid, tol=cfg.tol, K_constant=K)
    mesh = _mesh_for(sol, cfg, psi)
    diag = dict(sol.diagnostics)
    fin = phi.finite
    if fin.all() and np.ptp(phi.values) == 0 and K is not None:
        # dense constant data: the exact solution is a shifted hyperboloid
        X, Y = sol.u.mesh()
        core = X * X + Y * Y <= 0.81
        exact = float(phi.values[0]) + hyperboloid_values(X[core], Y[core], K)
        diag["exact_error"] = float(np.abs(sol.u.values[core] - exact).max())
    _emit_solution(sol, out, mesh)
    return diag


def cmd_barrier(cfg: RunConfig, out: Path) -> dict:
    from . import barriers as b
    spec, K, n = cfg.barrier, cfg.K, cfg.grid
    R = cfg.R or 2.0
    mesh = None
    if spec.kind == "hyperboloid":
        field, mesh = b.hyperboloid_support(K, n), b.hyperboloid_mesh(K, R, cfg.mesh_grid)
        diag = {}
    elif spec.kind == "chord":
        ch = b.Chord.from_angles(math.radians(spec.chord[0]), math.radians(spec.chord[1]))
        field, diag = b.chord_barrier(K, ch, n), {"chord": [ch.p, ch.q]}
    elif spec.kind == "revolution":
        prof, mesh, field = b.revolution_surface(spec.a, K, R, cfg.mesh_grid, n)
        diag = {"a": spec.a, "F": prof.F_of_a, "arclength_defect": prof.arclength_defect()}
        _write_rows(out / "profile.csv", ["t", "g", "r"], zip(prof.t, prof.g, prof.r))
    else:
        field, mesh = b.trough_support(n), b.trough_mesh(R, cfg.mesh_grid)
        diag = {}
    field.to_csv(out / "solution.csv")
    if mesh is not None:
        mesh.to_obj(out / "mesh.obj")
    (out / "plotdata").mkdir(exist_ok=True)
    _radial(field, out / "plotdata" / "radial.csv")
    diag["kind"] = spec.kind
    return diag


def cmd_triangle(cfg: RunConfig, out: Path) -> dict:
    from .triangular import axis_properness_report, bochner_shoot, cross_validate, triangular_support
    ang = np.radians(cfg.vertices)
    V = np.column_stack([np.cos(ang), np.sin(ang)])
    sol = triangular_support(cfg.K, V, cfg.values, n=cfg.grid, levels=cfg.levels, tol=cfg.tol)
    diag = dict(sol.diagnostics)
    prof = bochner_shoot()
    diag["bochner"] = {"h0": prof.h0, "A": prof.A, "C": prof.C, "r0": prof.r0,
                       "r_match": prof.r_match, "c_tail": prof.c_tail}
    diag["properness"] = axis_properness_report(prof)
    steps = np.diff(np.sort(np.mod(cfg.vertices, 360.0)))
    symmetric = np.allclose(steps, 120.0) and np.ptp(cfg.values) == 0
    if symmetric:
        # the developed surface is the K = 1 leaf for zero data at 0, 120, 240 degrees;
        # other rotations, constants and K follow by symmetry and scaling
        rot = math.radians(float(np.sort(np.mod(cfg.vertices, 360.0))[0]))
        c, s = math.cos(rot), math.sin(rot)

        def normalised(x, y):
            return (sol.u.sample(c * x - s * y, s * x + c * y) - cfg.values[0]) * math.sqrt(cfg.K)

        diag["cross_validation"] = cross_validate(normalised, prof)
    prof.to_csv(out / "bochner.csv")
    _emit_solution(sol, out, _mesh_for(sol, cfg, cfg.K))
    return diag


def cmd_foliate(cfg: RunConfig, out: Path) -> dict:
    from .foliation import k_sweep
    run = k_sweep(cfg.boundary(), cfg.K_list, n=cfg.grid, levels=cfg.levels, R=cfg.R)
    run.write_summary(out / "sweep.json")
    (out / "plotdata").mkdir(exist_ok=True)
    _write_rows(out / "plotdata" / "margins.csv", ["K1", "K2", "min_all", "min_core"],
                [(run.K_list[i], run.K_list[j], m["min_all"], m["min_core"]) for (i, j), m in run.margins.items()])
    for K, s in zip(run.K_list, run.solutions):
        s.u.to_csv(out / f"solution_K{K:.6g}.csv")
    return {"K_list": list(run.K_list), "margins": run.margins,
            "ordered": all(m["ordered"] for m in run.margins.values()), "summary": run.summary()}


def cmd_ktime(cfg: RunConfig, out: Path) -> dict:
    from .foliation import k_time, write_k_time_table
    phi = cfg.boundary()
    rows = [k_time(phi, p, cfg.bracket, tol=cfg.ktime_tol, n=cfg.grid, levels=cfg.levels, solver_tol=cfg.tol)
            for p in cfg.points]
    write_k_time_table(rows, out / "ktime.csv")
    return {"points": [{"point": r.point, "K": r.K, "tau": r.tau, "margin": r.margin,
                        "evaluations": r.evaluations} for r in rows]}


def cmd_verify(cfg: RunConfig, out: Path) -> dict:
    from .verify import run_suite
    results = run_suite(grid=cfg.grid, seed=cfg.seed)
    return {"checks": results, "all_passed": all(r["passed"] for r in results)}


HANDLERS = {"solve": cmd_solve, "barrier": cmd_barrier, "triangle": cmd_triangle,
            "foliate": cmd_foliate, "ktime": cmd_ktime, "verify": cmd_verify}


def run(cfg: RunConfig, out: Optional[Path] = None) -> tuple[int, Path]:
    """Execute one configuration; returns (exit status, run directory)."""
    out = Path(out or cfg.out or f"run_{cfg.command}")
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "config.json", cfg.model_dump(mode="json"))
    status, diag = EXIT_OK, {}
    try:
        diag = HANDLERS[cfg.command](cfg, out)
        if cfg.command == "verify" and not diag["all_passed"]:
            status = EXIT_NONCONVERGENCE
    except Wedge as e:
        status, diag = EXIT_REJECTED, {"error": "Wedge", "message": f"rejected: the data define a wedge, "
                                       f"not a regular domain ({e})"}
    except NotRegular as e:
        status, diag = EXIT_REJECTED, {"error": "NotRegular", "message": str(e)}
    except (NonConvergence, BisectionExhausted, BracketFailure, StepRejected) as e:
        status, diag = EXIT_NONCONVERGENCE, {"error": type(e).__name__, "message": str(e)}
    diag["status"] = status
    _write_json(out / "diagnostics.json", diag)
    if "message" in diag:
        log.error(diag["message"])
    return status, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="cgcsurf", description=__doc__)
    ap.add_argument("command", nargs="?", choices=COMMANDS)
    ap.add_argument("--config")
    ap.add_argument("--out")
    ap.add_argument("--grid", type=int)
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    if not args.command and not args.config:
        ap.error("a command or --config is required")
    try:
        cfg = load_config(args.config, args.command, {"grid": args.grid, "out": args.out})
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    status, out = run(cfg)
    if not args.quiet:
        print(f"{cfg.command}: status {status}, run directory {out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
