"""``cage`` command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 domain-negative answer
(collision, unreachable), 3 oracle disagreement.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import planner as pl
from .geometry import clearance, intersects, transform_shape
from .lie import Pose, Twist, rotation_2d
from .render import render_svg
from .scenefile import SceneFileError, parse_scene
from .sweep import PiecewiseMove

EXIT_OK, EXIT_USAGE, EXIT_NEGATIVE, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _grid_counts(text):
    try:
        parts = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected NX,NY,NTHETA") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected NX,NY,NTHETA")
    return tuple(parts)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scene", required=True, type=Path)
    common.add_argument("--json", action="store_true", help="emit a report_v1 JSON document")
    common.add_argument("--out", type=Path, help="output path (SVG for render, report otherwise)")
    gridded = argparse.ArgumentParser(add_help=False)
    gridded.add_argument("--grid", type=_grid_counts, metavar="NX,NY,NTHETA")
    gridded.add_argument("--k-max", type=int, dest="k_max")

    p = argparse.ArgumentParser(prog="cage", description="Caging analysis of planar scenes.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("check", parents=[common], help="collision test at a named pose")
    s.add_argument("--from", dest="from_label", required=True)
    s = sub.add_parser("components", parents=[common, gridded], help="congruence classes of free cells")
    s.add_argument("--ell0", type=int)
    s = sub.add_parser("min-moves", parents=[common, gridded], help="fewest simple moves between two poses")
    s.add_argument("--from", dest="from_label", required=True)
    s.add_argument("--to", dest="to_label", required=True)
    s.add_argument("--oracle", action="store_true", help="cross-check with the dense-sampling search")
    s = sub.add_parser("escape", parents=[common, gridded], help="fewest simple moves to the exterior")
    s.add_argument("--from", dest="from_label", required=True)
    s.add_argument("--oracle", action="store_true")
    s = sub.add_parser("classify", parents=[common, gridded], help="classify the scene at ell0")
    s.add_argument("--ell0", type=int, required=True)
    s = sub.add_parser("render", parents=[common], help="SVG drawing of the scene and a move report")
    s.add_argument("--from", dest="from_label")
    s.add_argument("--report", type=Path, help="min-moves/escape JSON report to draw")
    return p


def _pose_json(scene, p: Pose) -> dict:
    x, y, th = pl.placement_coords(scene, p)
    return {"theta": p.theta, "translation": [float(v) for v in p.translation], "placement": [x, y, th]}


def _pose_from_json(d) -> Pose:
    return Pose(rotation_2d(d["theta"]), np.array(d["translation"], dtype=float))


def _grid_json(g: pl.PoseGrid) -> dict:
    return {"x_range": list(g.x_range), "y_range": list(g.y_range), "nx": g.nx, "ny": g.ny,
            "ntheta": g.ntheta, "k_max": g.k_max}


def _escape_json(scene, rep: pl.EscapeReport) -> dict:
    segs, way = [], []
    if rep.moves is not None:
        segs = [{"xi": [float(g.xi[0]), float(g.xi[1])], "theta": float(g.omega)} for g in rep.moves.segments]
        way = [_pose_json(scene, p) for p in rep.moves.endpoints()]
    return {
        "ell": rep.ell,
        "reachable": rep.reachable,
        "from_pose": _pose_json(scene, rep.from_pose),
        "to_pose": None if rep.to_pose is None else _pose_json(scene, rep.to_pose),
        "segments": segs,
        "waypoints": way,
        "certificate": rep.verdict.outcome if rep.verdict is not None else "none",
        "resolution_note": rep.resolution_note,
    }


def _class_json(scene, c: pl.CagingClassification) -> dict:
    return {
        "verdict": c.verdict,
        "component_count": c.component_count,
        "ell0": c.ell0,
        "witness": None if c.witness is None else [_pose_json(scene, p) for p in c.witness],
    }


def _args_json(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("command", "json", "out"):
            continue
        if isinstance(v, Path):
            v = str(v)
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def run(args) -> tuple[dict, int, list[str]]:
    sf = parse_scene(args.scene)
    scene = sf.scene
    grid = None
    if hasattr(args, "grid"):
        grid = sf.pose_grid(args.grid, args.k_max)
    lines = [f"scene {scene.name}"]
    code = EXIT_OK
    cmd = args.command

    if cmd == "check":
        p = sf.pose(args.from_label)
        posed = transform_shape(p, scene.object)
        hit = intersects(posed, scene)
        c = clearance(posed, scene)
        result = {"pose": _pose_json(scene, p), "collision": hit, "clearance": None if math.isinf(c) else c}
        lines.append(f"pose {args.from_label}: {'colliding' if hit else 'free'}, clearance {c:.6g}")
        code = EXIT_NEGATIVE if hit else EXIT_OK

    elif cmd == "components":
        fs = pl.build_free_space(scene, grid)
        comps = pl.connected_components(fs, scene)
        result = {"component_count": comps.count, "census": comps.census()}
        lines.append(f"{grid.note()}")
        lines.append(f"components: {comps.count} (cells per component: {comps.census()})")
        if args.ell0 is not None:
            cl = pl.classify_caging(scene, grid, args.ell0, [sf.pose(k) for k in sf.poses], fs)
            result["classification"] = _class_json(scene, cl)
            lines.append(f"classification at ell0={args.ell0}: {cl.verdict}")

    elif cmd in ("min-moves", "escape"):
        a = sf.pose(args.from_label)
        fs = pl.build_free_space(scene, grid)
        if cmd == "min-moves":
            b = sf.pose(args.to_label)
            rep = pl.min_simple_moves(scene, a, b, grid, fs)
        else:
            rep = pl.escape_to_exterior(scene, a, grid, fs)
        result = _escape_json(scene, rep)
        lines.append(grid.note())
        lines.append(f"ell = {rep.ell if rep.reachable else 'unreachable at resolution'}")
        for i, g in enumerate(rep.moves.segments if rep.moves else []):
            lines.append(f"  move {i + 1}: xi=({g.xi[0]:.6g}, {g.xi[1]:.6g}) theta={g.omega:.6g}")
        code = EXIT_OK if rep.reachable else EXIT_NEGATIVE
        if args.oracle:
            if cmd == "min-moves":
                o = pl.brute_force_min_moves(scene, a, b, grid, fs)
            else:
                o = pl.escape_to_exterior(scene, a, grid, fs, oracle=True)
            agree = o.ell == rep.ell
            result["oracle"] = {"ell": o.ell, "agree": agree}
            lines.append(f"oracle ell = {o.ell} ({'agrees' if agree else 'MISMATCH'})")
            if not agree:
                code = EXIT_MISMATCH

    elif cmd == "classify":
        cl = pl.classify_caging(scene, grid, args.ell0, [sf.pose(k) for k in sf.poses])
        result = _class_json(scene, cl)
        lines.append(grid.note())
        lines.append(f"classification at ell0={args.ell0}: {cl.verdict} ({cl.component_count} component(s))")

    elif cmd == "render":
        if args.out is None:
            raise UsageError("render needs --out")
        moves = None
        if args.report is not None:
            rep = json.loads(args.report.read_text())
            r = rep.get("result", {})
            if "segments" not in r:
                raise UsageError("report has no move sequence")
            start = _pose_from_json(r["from_pose"])
            if r["segments"]:
                moves = PiecewiseMove(start, [Twist(s["xi"], s["theta"]) for s in r["segments"]])
        elif args.from_label is not None:
            start = sf.pose(args.from_label)
        elif sf.poses:
            start = sf.pose(next(iter(sf.poses)))
        else:
            start = pl.placement(scene, 0.0, 0.0, 0.0)
        svg = render_svg(scene, start, moves)
        try:
            args.out.write_text(svg)
        except OSError as e:
            raise UsageError(f"cannot write {args.out}: {e.strerror}") from None
        panels = 1 + (len(moves) if moves else 0)
        result = {"out": str(args.out), "panels": panels}
        lines.append(f"wrote {args.out} ({panels} panel(s))")

    report = {
        "schema": "report_v1",
        "command": {"name": cmd, "args": _args_json(args)},
        "scene": scene.name,
        "grid": None if grid is None else _grid_json(grid),
        "result": result,
    }
    return report, code, lines


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    t0 = time.perf_counter()
    try:
        report, code, lines = run(args)
    except (SceneFileError, pl.PlannerError, UsageError, OSError, ValueError) as e:
        print(f"cage: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    else:
        text = "\n".join(lines + [f"wall time {time.perf_counter() - t0:.2f}s"]) + "\n"
    if args.out is not None and args.command != "render":
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
