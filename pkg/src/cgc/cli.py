"""Command line runner: ``cgc solve2d|solve3d|verify|selftest|convergence``.

Configs are plain sectioned ``key=value`` files; every run writes its
artifacts plus ``manifest.json`` and ``config.resolved.ini`` into the run
directory.  Exit codes: 0 success, 1 config error, 2 solver failure
(non-convergence, infeasible construction), 3 verification violations.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import io as cio
from .bodies import GraphPatch, ball, hausdorff, hull_K0, make_scenario
from .errors import DegenerateIntersection, Infeasible, InvalidArgument, NonConvergence, OutOfRange
from .mongeampere import apex_height, build_patch, compare_to_cap, rim_angle, solve, stencil
from .perron2d import analytic_Kt, perron_solve2d
from .probe import ProbeGrid, check_type_F, check_type_F_dual
from .symcone import axiom_suite

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VIOLATIONS = 0, 1, 2, 3
OUTPUT_ROOT_ENV = "CGC_OUTPUT_ROOT"
COMMANDS = ("solve2d", "solve3d", "verify", "selftest", "convergence")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config schema

AUTO = "auto"


@dataclass(frozen=True)
class Key:
    kind: type
    default: object
    help: str


SCHEMA = {
    "scenario": {
        "dim": Key(int, 2, "ambient dimension, 2 or 3"),
        "R": Key(float, 1.0, "radius of the ball K_hat"),
        "alpha": Key(float, math.pi / 2, "half-angle of the cap Omega (dim 2, radians)"),
        "z0": Key(float, 0.8, "cap height, Omega = {z > z0} (dim 3)"),
        "t": Key(float, 0.5, "curvature target, 0 < t <= k = R^-(dim-1)"),
    },
    "solver": {
        "m": Key(int, 720, "direction count of the planar construction"),
        "h": Key(float, AUTO, "grid spacing of the graph solver (auto: rho/32)"),
        "stencil_width": Key(int, 2, "wide-stencil width, 1 or 2"),
        "tol": Key(float, AUTO, "max-norm residual tolerance (auto: 1e-8*t)"),
        "max_sweeps": Key(int, 20000, "sweep budget of the graph solver"),
        "omega": Key(float, 1.0, "relaxation of each nodal update, in (0, 1]"),
        "levels": Key(int, 3, "refinement levels of the convergence study (finest = m or h)"),
    },
    "verify": {
        "source": Key(str, "oracle", "body to probe: oracle, solve, or a path (piece list or patch CSV)"),
        "t": Key(float, AUTO, "curvature threshold to test (auto: scenario t)"),
        "eps": Key(float, AUTO, "probe margin (auto: 0.05*t)"),
        "interior": Key(str, AUTO, "probe only inside K_hat: true, false or auto (true unless source is a path)"),
        "points": Key(int, 256, "boundary sample count"),
        "samples": Key(int, 10000, "sample count per cone check in selftest"),
    },
    "output": {
        "svg": Key(bool, True, "write the SVG overlay (solve2d)"),
        "mesh": Key(bool, True, "write the OBJ mesh (solve3d)"),
    },
}


def _coerce(section, key, text, lineno):
    spec = SCHEMA[section][key]
    if text == AUTO and spec.default == AUTO:
        return AUTO
    try:
        if spec.kind is bool:
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if spec.kind is int:
            return int(text)
        if spec.kind is float:
            value = float(text)
            if not math.isfinite(value):
                raise ValueError(text)
            return value
        return text
    except ValueError:
        raise ConfigError(f"line {lineno}: {section}.{key} expects {spec.kind.__name__}, got {text!r}") from None


@dataclass
class RunConfig:
    """Resolved configuration: every key of every section carries its effective value."""

    scenario: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def sections(self) -> dict:
        return {"scenario": self.scenario, "solver": self.solver, "verify": self.verify, "output": self.output}

    def to_text(self) -> str:
        lines = []
        for name, values in self.sections().items():
            lines.append(f"[{name}]")
            for key, value in values.items():
                if isinstance(value, bool):
                    text = "true" if value else "false"
                elif isinstance(value, float):
                    text = repr(value)
                else:
                    text = str(value)
                lines.append(f"{key}={text}")
            lines.append("")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {k: dict(v) for k, v in self.sections().items()}

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(**{k: dict(data[k]) for k in SCHEMA})

    def scenario_obj(self):
        s = self.scenario
        opening = s["alpha"] if s["dim"] == 2 else s["z0"]
        return make_scenario(s["R"], opening, s["t"], s["dim"])


def parse_text(text: str, resolve: bool = True) -> RunConfig:
    raw = {name: {} for name in SCHEMA}
    section = "scenario"
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {line!r}")
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        for token in line.split():
            if "=" not in token:
                raise ConfigError(f"line {lineno}: expected key=value, got {token!r}")
            key, value = (x.strip() for x in token.split("=", 1))
            if key not in SCHEMA[section]:
                raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
            if key in raw[section]:
                raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{section}]")
            raw[section][key] = _coerce(section, key, value, lineno)
    cfg = RunConfig(**{name: {k: raw[name].get(k, spec.default) for k, spec in keys.items()}
                       for name, keys in SCHEMA.items()})
    return resolve_config(cfg) if resolve else cfg


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_text(text)


def resolve_config(cfg: RunConfig) -> RunConfig:
    """Validate the scenario and replace every ``auto`` by its value."""
    try:
        s = cfg.scenario_obj()
    except (OutOfRange, InvalidArgument) as exc:
        raise ConfigError(str(exc)) from None
    sol, ver = dict(cfg.solver), dict(cfg.verify)
    if sol["h"] == AUTO:
        sol["h"] = s.rim_radius / 32 if s.dim == 3 else 0.0
    if sol["tol"] == AUTO:
        sol["tol"] = 1e-8 * s.t
    if ver["t"] == AUTO:
        ver["t"] = s.t
    if ver["eps"] == AUTO:
        ver["eps"] = 0.05 * ver["t"]
    if ver["interior"] == AUTO:
        ver["interior"] = "true" if ver["source"] in ("oracle", "solve") else "false"
    if ver["interior"] not in ("true", "false"):
        raise ConfigError(f"verify.interior must be true, false or auto, got {ver['interior']!r}")
    checks = [
        (sol["m"] >= 16, f"solver.m must be >= 16, got {sol['m']}"),
        (sol["stencil_width"] in (1, 2), f"solver.stencil_width must be 1 or 2, got {sol['stencil_width']}"),
        (sol["tol"] > 0, "solver.tol must be positive"),
        (sol["max_sweeps"] >= 1, "solver.max_sweeps must be >= 1"),
        (0 < sol["omega"] <= 1, "solver.omega must lie in (0, 1]"),
        (ver["t"] > 0 and ver["eps"] > 0, "verify.t and verify.eps must be positive"),
        (ver["points"] >= 8 and ver["samples"] >= 1, "verify.points must be >= 8 and verify.samples >= 1"),
    ]
    if s.dim == 3:
        checks.append((0 < sol["h"] <= s.rim_radius / 8 * (1 + 1e-12),
                       f"solver.h must lie in (0, rho/8 = {s.rim_radius / 8:g}]"))
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)
    return RunConfig(dict(cfg.scenario), sol, ver, dict(cfg.output))


def defaults_help() -> str:
    lines = ["config keys (section.key = default: meaning); keys before any section belong to [scenario]:"]
    for section, keys in SCHEMA.items():
        for key, spec in keys.items():
            default = spec.default if not isinstance(spec.default, float) else f"{spec.default:.10g}"
            lines.append(f"  {section}.{key} = {default}: {spec.help}")
    return "\n".join(lines)


# ---------------------------------------------------------------- runs


@dataclass
class RunContext:
    cfg: RunConfig
    outdir: Path
    seed: int
    parallel: bool
    results: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)

    def path(self, name: str) -> Path:
        self.artifacts.append(name)
        return self.outdir / name


def _run_solve2d(ctx: RunContext) -> int:
    s = ctx.cfg.scenario_obj()
    if s.dim != 2:
        raise ConfigError("solve2d needs scenario.dim = 2")
    m = ctx.cfg.solver["m"]
    t0 = time.perf_counter()
    body = perron_solve2d(s, m)
    ctx.results["solve_seconds"] = time.perf_counter() - t0
    oracle = analytic_Kt(s)
    cio.write_body(ctx.path("body.txt"), body)
    cio.write_body(ctx.path("oracle.txt"), oracle)
    ctx.results.update(hausdorff_to_oracle=hausdorff(body, oracle), pieces=len(body.pieces),
                       area=body.area, oracle_area=oracle.area, tolerance=2 * (2 * math.pi / m))
    if ctx.cfg.output["svg"]:
        cio.write_svg(ctx.path("overlay.svg"), [("K_hat", ball(s), "#999999"), ("K0", hull_K0(s), "#1f77b4"),
                                                ("oracle", oracle, "#2ca02c"), ("K_t", body, "#d62728")])
    return EXIT_OK


def _solve_patch(ctx: RunContext, s, h=None):
    sol = ctx.cfg.solver
    patch = build_patch(s, h or sol["h"])
    return solve(patch, s.t, stencil(sol["stencil_width"]), sol["tol"], sol["max_sweeps"],
                 parallel=ctx.parallel, omega=sol["omega"])


def _run_solve3d(ctx: RunContext) -> int:
    s = ctx.cfg.scenario_obj()
    if s.dim != 3:
        raise ConfigError("solve3d needs scenario.dim = 3")
    t0 = time.perf_counter()
    try:
        out, history = _solve_patch(ctx, s)
    except NonConvergence as exc:
        cio.write_history_csv(ctx.path("history.csv"), exc.history)
        if exc.patch is not None:
            cio.write_patch_csv(ctx.path("surface.csv"), exc.patch)
        ctx.results["sweeps"] = len(exc.history)
        raise
    ctx.results["solve_seconds"] = time.perf_counter() - t0
    cio.write_history_csv(ctx.path("history.csv"), history)
    cio.write_patch_csv(ctx.path("surface.csv"), out)
    if ctx.cfg.output["mesh"]:
        cio.write_patch_obj(ctx.path("surface.obj"), out)
    err, _ = compare_to_cap(out, s)
    ctx.results.update(sweeps=len(history), final_residual=history[-1], apex=apex_height(out),
                       cap_max_error=err, rim_radius=s.rim_radius, h=out.h, rim_angle_deg=rim_angle(out, s))
    return EXIT_OK


def _verify_target(ctx: RunContext, s):
    source = ctx.cfg.verify["source"]
    if source == "oracle":
        if s.dim != 2:
            raise ConfigError("verify.source = oracle is only available for dim = 2")
        return analytic_Kt(s)
    if source == "solve":
        if s.dim == 2:
            return perron_solve2d(s, ctx.cfg.solver["m"])
        return _solve_patch(ctx, s)[0]
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"verify.source {source!r} is neither oracle, solve nor a readable file")
    if path.suffix.lower() == ".csv":
        if s.dim != 3:
            raise ConfigError("patch CSV sources need scenario.dim = 3")
        return cio.load_patch_values(build_patch(s, ctx.cfg.solver["h"]), path)
    try:
        return cio.read_body(path)
    except (InvalidArgument, ValueError) as exc:
        raise ConfigError(f"cannot read body from {source}: {exc}") from None


def _run_verify(ctx: RunContext) -> int:
    s = ctx.cfg.scenario_obj()
    ver = ctx.cfg.verify
    target = _verify_target(ctx, s)
    grid = ProbeGrid(points=ver["points"])
    interior = ball(s) if ver["interior"] == "true" and s.dim == 2 and not isinstance(target, GraphPatch) else None
    kw = dict(eps=ver["eps"], grid=grid, interior_of=interior)
    reports = {"F": check_type_F(target, ver["t"], **kw), "dual": check_type_F_dual(target, ver["t"], **kw)}
    cio.write_violations_csv(ctx.path("violations.csv"), reports)
    for kind, rep in reports.items():
        ctx.results[f"{kind}_violations"] = len(rep)
        ctx.results[f"{kind}_points_tested"] = rep.points_tested
        ctx.results[f"{kind}_probes_tried"] = rep.probes_tried
    return EXIT_VIOLATIONS if any(len(r) for r in reports.values()) else EXIT_OK


def _run_selftest(ctx: RunContext) -> int:
    rows = axiom_suite(ctx.cfg.verify["samples"], ctx.seed, dim=2)
    with ctx.path("selftest.csv").open("w") as fh:
        fh.write("check,cone,samples,violations,expected,passed\n")
        for r in rows:
            fh.write(f"{r.check},{r.cone},{r.samples},{r.violations},"
                     f"{'some' if r.expect_violations else 'none'},{str(r.passed).lower()}\n")
    failed = [r for r in rows if not r.passed]
    ctx.results.update(checks=len(rows), failed=len(failed))
    return EXIT_VIOLATIONS if failed else EXIT_OK


def convergence_rows(ctx: RunContext, s, on_row=None):
    """(resolution, error vs oracle, ratio) rows over geometrically refined resolutions.

    The finest level is the configured m (planar) or h (graph); each coarser
    level halves the resolution.
    """
    levels = ctx.cfg.solver["levels"]
    if levels < 3:
        raise InvalidArgument(f"a convergence study needs at least 3 levels, got {levels}")
    rows = []
    for k in reversed(range(levels)):
        if s.dim == 2:
            m = ctx.cfg.solver["m"] // 2 ** k
            res = float(m)
            err = hausdorff(perron_solve2d(s, m), analytic_Kt(s))
        else:
            h = ctx.cfg.solver["h"] * 2 ** k
            res = h
            err, _ = compare_to_cap(_solve_patch(ctx, s, h)[0], s)
        ratio = rows[-1][1] / err if rows and err > 0 else None
        rows.append((res, err, ratio))
        if on_row:
            on_row(rows)
    return rows


def convergence_study(cfg: RunConfig, levels: int | None = None, path=None, parallel: bool = False):
    """Refinement table for ``cfg``; with ``path`` the CSV is rewritten after every row,
    so a failing level leaves the finished rows on disk."""
    if levels is not None:
        cfg = RunConfig(dict(cfg.scenario), {**cfg.solver, "levels": levels}, dict(cfg.verify), dict(cfg.output))
    ctx = RunContext(cfg, Path(path).parent if path else Path("."), 0, parallel)
    on_row = (lambda r: cio.write_convergence_csv(path, r)) if path else None
    return convergence_rows(ctx, cfg.scenario_obj(), on_row)


def _run_convergence(ctx: RunContext) -> int:
    s = ctx.cfg.scenario_obj()
    path = ctx.path("convergence.csv")
    rows = convergence_rows(ctx, s, on_row=lambda r: cio.write_convergence_csv(path, r))
    ratios = [r[2] for r in rows if r[2] is not None]
    ctx.results.update(levels=len(rows), min_ratio=min(ratios), errors=[r[1] for r in rows])
    return EXIT_OK


RUNNERS = {"solve2d": _run_solve2d, "solve3d": _run_solve3d, "verify": _run_verify,
           "selftest": _run_selftest, "convergence": _run_convergence}


def _versions() -> dict:
    import numba

    return {"cgc": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "numba": numba.__version__}


def resolve_outdir(out: str) -> Path:
    path = Path(out)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not path.is_absolute():
        path = Path(root) / path
    return path


def run_scenario(command: str, cfg: RunConfig, outdir, seed: int = 0, parallel: bool = False,
                 argv=None) -> int:
    """Run one subcommand into ``outdir``; always writes the manifest."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(cfg, outdir, seed, parallel)
    (outdir / "config.resolved.ini").write_text(cfg.to_text())
    error = None
    start = time.perf_counter()
    try:
        code = RUNNERS[command](ctx)
    except ConfigError as exc:
        code, error = EXIT_CONFIG, f"config error: {exc}"
    except (NonConvergence, Infeasible, DegenerateIntersection) as exc:
        code, error = EXIT_SOLVER, f"{type(exc).__name__}: {exc}"
    except (InvalidArgument, OutOfRange) as exc:
        code, error = EXIT_CONFIG, f"{type(exc).__name__}: {exc}"
    except Exception as exc:  # recorded, then re-raised below
        (outdir / "manifest.json").write_text(json.dumps(
            _manifest(command, cfg, seed, parallel, argv, ctx, time.perf_counter() - start, None,
                      f"unexpected {type(exc).__name__}: {exc}\n{traceback.format_exc()}"), indent=2))
        raise
    manifest = _manifest(command, cfg, seed, parallel, argv, ctx, time.perf_counter() - start, code, error)
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, default=_json_default))
    if error:
        print(error, file=sys.stderr)
    return code


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _manifest(command, cfg, seed, parallel, argv, ctx, seconds, code, error):
    return {
        "command": command,
        "argv": list(argv) if argv is not None else None,
        "config": cfg.to_dict(),
        "seed": seed,
        "parallel": parallel,
        "versions": _versions(),
        "wall_seconds": seconds,
        "exit_code": code,
        "status": "ok" if code == EXIT_OK else ("violations" if code == EXIT_VIOLATIONS else "error"),
        "error": error,
        "results": ctx.results,
        "artifacts": ctx.artifacts,
    }


def config_from_manifest(path) -> RunConfig:
    """Re-create the resolved config of a previous run."""
    data = json.loads(Path(path).read_text())
    return RunConfig.from_dict(data["config"])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cgc",
        description="Constant Gauss curvature Plateau solver and viscosity verifier.",
        epilog=defaults_help() + f"\n\nenvironment: {OUTPUT_ROOT_ENV} prefixes relative --out paths.\n"
                                 "exit codes: 0 ok, 1 config error, 2 solver failure, 3 violations.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="sectioned key=value config file")
    p.add_argument("--out", required=True, help="run directory")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized checks (default 0)")
    p.add_argument("--parallel", action="store_true", help="colour-ordered parallel sweeps in the graph solver")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    outdir = resolve_outdir(args.out)
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "manifest.json").write_text(json.dumps({
            "command": args.command, "argv": argv, "config": None, "seed": args.seed,
            "versions": _versions(), "exit_code": EXIT_CONFIG, "status": "error",
            "error": f"config error: {exc}", "results": {}, "artifacts": []}, indent=2))
        return EXIT_CONFIG
    return run_scenario(args.command, cfg, outdir, args.seed, args.parallel, argv)


if __name__ == "__main__":
    raise SystemExit(main())
