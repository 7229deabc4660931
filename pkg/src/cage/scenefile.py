"""Reading and writing scene files (JSON, schema ``scene_v1``).

Named poses give the object's centroid position ``(x, y)`` and its rotation
``theta_radians`` about the centroid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .geometry import GeometryError, Obstacle, ObjectShape, Scene
from .lie import Pose
from .planner import PoseGrid, default_grid, placement, placement_coords


class SceneFileError(ValueError):
    pass


def _schema(name: str) -> dict:
    return json.loads(resources.files("cage.schemas").joinpath(name).read_text())


SCENE_SCHEMA = _schema("scene_v1.json")


@dataclass
class SceneFile:
    scene: Scene
    poses: dict = field(default_factory=dict)  # label -> (x, y, theta)
    grid: dict = field(default_factory=dict)

    def pose(self, label: str) -> Pose:
        if label not in self.poses:
            raise SceneFileError(f"no pose labelled {label!r}")
        return placement(self.scene, *self.poses[label])

    def pose_grid(self, counts=None, k_max=None) -> PoseGrid:
        """The file's grid (or a default around the cage), optionally with new counts / k_max."""
        g = self.grid
        base = default_grid(self.scene)
        nx, ny, nt = counts or (g.get("nx", base.nx), g.get("ny", base.ny), g.get("ntheta", base.ntheta))
        return PoseGrid(
            g.get("x_range", base.x_range), g.get("y_range", base.y_range),
            nx, ny, nt, g.get("k_max", base.k_max) if k_max is None else k_max,
        )


def _reject_nonfinite(token):
    raise ValueError(f"non-finite number {token}")


def loads(text: str, source: str = "<string>") -> SceneFile:
    try:
        doc = json.loads(text, parse_constant=_reject_nonfinite)
    except json.JSONDecodeError as e:
        raise SceneFileError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from None
    except ValueError as e:
        raise SceneFileError(f"{source}: {e}") from None
    errors = sorted(jsonschema.Draft202012Validator(SCENE_SCHEMA).iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.path) or "<root>"
        raise SceneFileError(f"{source}: at {where}: {e.message}")
    try:
        shape = ObjectShape(doc["object"]["vertices"])
        cage = []
        for o in doc["obstacles"]:
            cid = o.get("component", 0)
            if o["type"] == "disc":
                cage.append(Obstacle.disc(o["center"], o["radius"], cid))
            else:
                cage.append(Obstacle.capsule(o["a"], o["b"], o["radius"], cid))
        scene = Scene(shape, tuple(cage), doc.get("name", Path(source).stem))
    except GeometryError as e:
        raise SceneFileError(f"{source}: {e}") from None
    poses = {}
    for p in doc.get("poses", []):
        if p["label"] in poses:
            raise SceneFileError(f"{source}: duplicate pose label {p['label']!r}")
        poses[p["label"]] = (float(p["x"]), float(p["y"]), float(p["theta_radians"]))
    return SceneFile(scene, poses, dict(doc.get("grid", {})))


def parse_scene(path) -> SceneFile:
    path = Path(path)
    return loads(path.read_text(), str(path))


def to_dict(sf: SceneFile) -> dict:
    obstacles = []
    for o in sf.scene.cage:
        if o.kind == "disc":
            obstacles.append({"type": "disc", "center": list(o.a), "radius": o.radius, "component": o.component_id})
        else:
            obstacles.append({"type": "capsule", "a": list(o.a), "b": list(o.b), "radius": o.radius,
                              "component": o.component_id})
    doc = {
        "name": sf.scene.name,
        "object": {"vertices": sf.scene.object.vertices.tolist()},
        "obstacles": obstacles,
        "poses": [{"label": k, "x": v[0], "y": v[1], "theta_radians": v[2]} for k, v in sf.poses.items()],
    }
    if sf.grid:
        doc["grid"] = {k: (list(v) if isinstance(v, (list, tuple)) else v) for k, v in sf.grid.items()}
    return doc


def dumps(sf: SceneFile) -> str:
    return json.dumps(to_dict(sf), indent=2) + "\n"


def pose_entry(scene: Scene, label: str, p: Pose) -> dict:
    x, y, th = placement_coords(scene, p)
    return {"label": label, "x": x, "y": y, "theta_radians": th}


def bundled_scenes() -> dict[str, Path]:
    """Name -> path of every scene shipped with the package."""
    root = resources.files("cage.scenes")
    return {p.name[:-5]: Path(str(p)) for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".json")}


def load_bundled(name: str) -> SceneFile:
    return parse_scene(bundled_scenes()[name])

