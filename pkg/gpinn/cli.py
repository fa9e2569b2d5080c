"""gpinn command-line interface.

Usage:
    gpinn init [--output gpinn.yaml]
    gpinn mesh-gen --kind house --h 0.02 --out house.json [--wall-thickness 0.06 ...]
    gpinn embed --mesh house.json [--out embedding.json]
    gpinn train --config gpinn.yaml
    gpinn evaluate --run runs/house-heat-gpinn [runs/house-heat-pinn] --points grid:128x128
    gpinn export --run runs/house-heat-gpinn --grid 128x128

Exit codes: 0 on success, 1 on bad arguments or inputs, 2 when a solver
fails to converge or training produces a non-finite loss.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from gpinn.core.errors import NUMERICAL_ERRORS, GpinnError

USER_ERRORS: tuple[type[Exception], ...] = (
    GpinnError,
    ValueError,
    KeyError,
    FileNotFoundError,
    ValidationError,
)


@dataclass
class CommandResult:
    """Outcome of one CLI command."""

    exit_code: int
    summary: str
    paths: list[Path] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.exit_code == 0


class UsageError(Exception):
    """Bad command-line arguments."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _configure_logging(level: str) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level.upper())


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_init(args: argparse.Namespace) -> CommandResult:
    """Write a starter configuration file."""
    output = Path(args.output)
    if output.exists() and not args.force:
        return CommandResult(1, f"File already exists: {output}. Use --force to overwrite.")

    from gpinn.config import DEFAULT_CONFIG_YAML

    output.write_text(DEFAULT_CONFIG_YAML)
    return CommandResult(
        0,
        f"Configuration written to: {output}\nEdit the file and run: gpinn train --config {output}",
        [output],
    )


# Flag destination -> (geometry section, field)
GEOMETRY_OVERRIDES: dict[str, tuple[str, str]] = {
    "side": ("house", "side"),
    "wall_thickness": ("house", "wall_thickness"),
    "source_center": ("house", "source_center"),
    "source_radius": ("house", "source_radius"),
    "window": ("house", "window"),
    "width": ("plate", "width"),
    "height": ("plate", "height"),
    "crack_tip": ("plate", "crack_tip"),
    "crack_mouth": ("plate", "crack_mouth"),
    "tip_refinement": ("plate", "tip_refinement"),
}

_WALL_FLAGS = ("left_wall", "right_wall")


def _geometry_overrides(args: argparse.Namespace) -> dict[str, dict]:
    """Nested geometry updates from the per-parameter mesh-gen flags."""
    updates: dict[str, dict] = {"house": {}, "plate": {}}
    for dest, (section, name) in GEOMETRY_OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            updates[section][name] = tuple(value) if isinstance(value, list) else value
    for dest in _WALL_FLAGS:
        value = getattr(args, dest, None)
        if value is not None:
            x, y_start, y_end = value
            updates["house"][dest] = {"x": x, "y_start": y_start, "y_end": y_end}
    return {section: fields for section, fields in updates.items() if fields}


def cmd_mesh_gen(args: argparse.Namespace) -> CommandResult:
    """Generate a built-in domain mesh."""
    from gpinn.config import GeometryConfig, load_config
    from gpinn.mesh import generate_domain, save_mesh

    geometry = load_config(args.config).geometry if args.config else GeometryConfig()
    raw = geometry.model_dump()
    raw["kind"] = args.kind or geometry.kind
    raw["h"] = args.h if args.h is not None else geometry.h
    for section, fields in _geometry_overrides(args).items():
        raw[section] = {**raw[section], **fields}
        logger.debug(f"mesh-gen {section} overrides: {fields}")
    geometry = GeometryConfig.model_validate(raw)
    mesh = generate_domain(geometry)
    path = save_mesh(mesh, args.out)
    return CommandResult(
        0,
        f"Wrote {geometry.kind} mesh ({mesh.n_nodes} nodes, {mesh.n_elements} elements) to {path}",
        [path],
    )


def cmd_embed(args: argparse.Namespace) -> CommandResult:
    """Compute (or fetch from the cache) the Fiedler embedding of a mesh."""
    from gpinn.config import EmbeddingConfig
    from gpinn.embedding import EmbeddingCache, EmbeddingDocument, embedding_for_mesh
    from gpinn.graph import graph_from_mesh, hot_cold_report
    from gpinn.mesh import load_mesh

    mesh = load_mesh(args.mesh)
    config = EmbeddingConfig(
        tol=args.tol,
        max_iterations=args.max_iterations,
        method=args.method,
        cache=not args.no_cache,
    )
    embedding, spectral, cache_hit = embedding_for_mesh(mesh, config)
    report = hot_cold_report(graph_from_mesh(mesh), spectral)
    logger.info(
        f"Hot spot {report.hot}, cold spot {report.cold}: distance {report.distance}, "
        f"pseudo-diameter {report.pseudo_diameter}"
    )
    paths: list[Path] = []
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        key = EmbeddingCache.key(mesh, config.tol)
        out.write_text(EmbeddingDocument.from_field(key, spectral, embedding).model_dump_json())
        paths.append(out)
    source = "cache" if cache_hit else "eigensolve"
    return CommandResult(
        0, f"lambda2 = {spectral.lambda2:.10g} ({source}), {mesh.n_nodes} nodes", paths
    )


def cmd_train(args: argparse.Namespace) -> CommandResult:
    """Run one experiment from a config file."""
    from gpinn.config import load_config
    from gpinn.training import run_experiment

    config = load_config(args.config)
    updates = {}
    if args.output_dir:
        updates["output_dir"] = args.output_dir
    if args.mode:
        updates["mode"] = args.mode
    if updates:
        config = config.model_copy(update=updates)
    if args.log_level is None:
        _configure_logging(config.logging.level)
    result = run_experiment(config)
    final = result.history[-1]["total"] if result.history else float("nan")
    return CommandResult(
        0,
        f"Trained {config.mode} on {config.problem}: {len(result.history)} iterations, "
        f"final loss {final:.6e} ({result.stopped_reason})",
        [result.artifacts.root],
    )


def _reference_for(run, path: str | None):
    from gpinn.config import GeometryConfig
    from gpinn.mesh import generate_domain
    from gpinn.reference import load_solution, save_solution
    from gpinn.training import build_problem

    if path:
        return load_solution(path)
    config = run.config
    geometry = GeometryConfig(**{**config.geometry.model_dump(), "h": config.reference.h})
    mesh = generate_domain(geometry)
    solution = build_problem(config, mesh).reference(mesh)
    save_solution(solution, run.artifacts.fields / "reference.json")
    return solution


def cmd_evaluate(args: argparse.Namespace) -> CommandResult:
    """Relative error of one run, or of two runs side by side, against a reference."""
    from gpinn.reference import evaluation_points, relative_error
    from gpinn.training import compare_runs, load_run

    if len(args.run) > 2:
        raise UsageError("evaluate takes one or two --run directories")
    runs = [load_run(r) for r in args.run]
    first = runs[0]
    reference = _reference_for(first, args.reference)
    n = first.config.reference.eval_grid
    spec = args.points or f"grid:{n}x{n}"
    points, descriptor = evaluation_points(spec, reference.mesh)

    if len(runs) == 1:
        report = relative_error(first.evaluate, reference, points, descriptor, reference.components)
        frame = report.frame()
        summary = (
            f"RE on {descriptor}: max {report.max:.4e}, mean {report.mean:.4e}, "
            f"l2 {report.l2:.4e}"
        )
    else:
        comparison = compare_runs(runs[0], runs[1], reference, points, descriptor)
        frame = comparison.frame()
        summary = "; ".join(
            f"{label}: max {s['max']:.4e} mean {s['mean']:.4e}"
            for label, s in comparison.summary().items()
        )
    out = Path(args.out) if args.out else first.artifacts.field_path("errors")
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False)
    return CommandResult(0, summary, [out])


def cmd_export(args: argparse.Namespace) -> CommandResult:
    """Sample a trained run or a FieldSolution on a regular grid.

    The grid CSV is a plot table (x, y, components, z) with no connectivity;
    only node-indexed files from ``save_solution`` load back as a FieldSolution.
    """
    from gpinn.embedding import eval_z
    from gpinn.mesh import load_mesh
    from gpinn.reference import load_solution, parse_grid, regular_grid
    from gpinn.training import load_run

    if bool(args.run) == bool(args.solution):
        raise UsageError("export needs exactly one of --run or --solution")
    nx, ny = parse_grid(args.grid)

    if args.run:
        run = load_run(args.run)
        mesh, components, evaluate = run.mesh, run.components, run.evaluate
        z_field = run.field
        default_out = run.artifacts.field_path(f"grid-{nx}x{ny}")
    else:
        mesh_ = load_mesh(args.mesh) if args.mesh else None
        solution = load_solution(args.solution, mesh_)
        mesh, components, evaluate = solution.mesh, solution.components, solution.evaluate
        z_field = None
        default_out = Path(args.solution).with_name(f"{Path(args.solution).stem}-grid.csv")

    points = regular_grid(mesh.bounds, nx, ny)
    values = np.asarray(evaluate(points)).reshape(len(points), -1)
    frame = pd.DataFrame({"x": points[:, 0], "y": points[:, 1]})
    for c, name in enumerate(components):
        frame[name] = values[:, c]
    if z_field is not None:
        frame["z"] = eval_z(z_field, points)
    out = Path(args.out) if args.out else default_out
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False)
    return CommandResult(0, f"Exported {len(frame)} grid points to {out}", [out])


# ---------------------------------------------------------------------------
# Parser and dispatch
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gpinn", description="PINN and graph-embedded PINN experiments")
    parser.add_argument("--log-level", default=None, help="Log level (default: INFO)")
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)

    init_parser = subparsers.add_parser("init", help="Generate a starter config file")
    init_parser.add_argument("--output", "-o", default="gpinn.yaml", help="Output path")
    init_parser.add_argument("--force", "-f", action="store_true", help="Overwrite existing file")
    init_parser.set_defaults(handler=cmd_init)

    mesh_parser = subparsers.add_parser("mesh-gen", help="Generate a built-in domain mesh")
    mesh_parser.add_argument(
        "--kind", choices=["house", "crack_plate", "plate", "unit_square"], default=None
    )
    mesh_parser.add_argument("--h", type=float, default=None, help="Target element size")
    mesh_parser.add_argument("--config", "-c", default=None, help="Take geometry from a config")
    mesh_parser.add_argument("--out", "-o", required=True, help="Output mesh (.json)")
    house = mesh_parser.add_argument_group("house overrides")
    house.add_argument("--side", type=float, default=None)
    house.add_argument("--wall-thickness", type=float, default=None)
    house.add_argument(
        "--left-wall", type=float, nargs=3, metavar=("X", "Y0", "Y1"), default=None
    )
    house.add_argument(
        "--right-wall", type=float, nargs=3, metavar=("X", "Y0", "Y1"), default=None
    )
    house.add_argument("--source-center", type=float, nargs=2, metavar=("X", "Y"), default=None)
    house.add_argument("--source-radius", type=float, default=None)
    house.add_argument("--window", type=float, nargs=2, metavar=("X0", "X1"), default=None)
    plate = mesh_parser.add_argument_group("plate overrides")
    plate.add_argument("--width", type=float, default=None)
    plate.add_argument("--height", type=float, default=None)
    plate.add_argument("--crack-tip", type=float, nargs=2, metavar=("X", "Y"), default=None)
    plate.add_argument("--crack-mouth", choices=["left", "right"], default=None)
    plate.add_argument("--tip-refinement", type=float, default=None)
    mesh_parser.set_defaults(handler=cmd_mesh_gen)

    embed_parser = subparsers.add_parser("embed", help="Compute a mesh's Fiedler embedding")
    embed_parser.add_argument("--mesh", "-m", required=True, help="Mesh file (.json or .msh)")
    embed_parser.add_argument("--tol", type=float, default=1e-10)
    embed_parser.add_argument("--max-iterations", type=int, default=10000, help="Iteration cap")
    embed_parser.add_argument(
        "--method", choices=["inverse_iteration", "dense"], default="inverse_iteration"
    )
    embed_parser.add_argument("--no-cache", action="store_true", help="Bypass the cache")
    embed_parser.add_argument("--out", "-o", default=None, help="Write the embedding JSON")
    embed_parser.set_defaults(handler=cmd_embed)

    train_parser = subparsers.add_parser("train", help="Train a network from a config")
    train_parser.add_argument("--config", "-c", default="gpinn.yaml", help="Config file")
    train_parser.add_argument("--mode", choices=["pinn", "gpinn"], default=None)
    train_parser.add_argument("--output-dir", default=None, help="Override output_dir")
    train_parser.set_defaults(handler=cmd_train)

    eval_parser = subparsers.add_parser("evaluate", help="Relative error against a reference")
    eval_parser.add_argument("--run", "-r", nargs="+", required=True, help="Run directory(ies)")
    eval_parser.add_argument("--reference", default=None, help="FieldSolution JSON")
    eval_parser.add_argument("--points", default=None, help="grid:NxM or file:<csv>")
    eval_parser.add_argument("--out", "-o", default=None, help="Output CSV")
    eval_parser.set_defaults(handler=cmd_evaluate)

    export_parser = subparsers.add_parser("export", help="Sample a field on a regular grid")
    export_parser.add_argument("--run", "-r", default=None, help="Run directory")
    export_parser.add_argument("--solution", "-s", default=None, help="FieldSolution file")
    export_parser.add_argument("--mesh", "-m", default=None, help="Mesh for CSV solutions")
    export_parser.add_argument("--grid", default="128x128", help="NxM grid (default 128x128)")
    export_parser.add_argument("--out", "-o", default=None, help="Output CSV")
    export_parser.set_defaults(handler=cmd_export)
    return parser


def dispatch(argv: Sequence[str] | None = None) -> CommandResult:
    """Parse ``argv`` and run the selected command."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return CommandResult(1, str(exc))
    except SystemExit as exc:  # --help
        return CommandResult(int(exc.code or 0), "")

    if args.command is None:
        return CommandResult(1, parser.format_help())
    _configure_logging(args.log_level or "INFO")
    handler: Callable[[argparse.Namespace], CommandResult] = args.handler
    try:
        return handler(args)
    except NUMERICAL_ERRORS as exc:
        logger.error(f"{args.command} failed: {exc}")
        return CommandResult(2, f"numerical failure: {exc}")
    except UsageError as exc:
        logger.error(str(exc))
        return CommandResult(1, f"{parser.format_usage()}{exc}")
    except FileNotFoundError as exc:
        logger.error(str(exc))
        return CommandResult(1, f"file not found: {exc}")
    except USER_ERRORS as exc:
        logger.error(f"{args.command} failed: {exc}")
        return CommandResult(1, f"error: {exc}")


def main(argv: Sequence[str] | None = None) -> None:
    """CLI entry point."""
    result = dispatch(argv)
    if result.summary:
        print(result.summary, file=sys.stdout if result.ok else sys.stderr)
    sys.exit(result.exit_code)


if __name__ == "__main__":
    main()
