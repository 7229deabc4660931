"""Planar object polygons, disc/capsule obstacles, and collision/clearance queries.

Collision uses closed-set semantics: touching counts as intersecting.
Distances are compared with an absolute tolerance of ``TOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .lie import Pose

TOL = K.TOL


class GeometryError(ValueError):
    pass


def _segments_touch(a, b, c, d) -> bool:
    if K._crosses(a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1]):
        return True
    return min(
        K._seg_dist2(a[0], a[1], c[0], c[1], d[0], d[1]),
        K._seg_dist2(b[0], b[1], c[0], c[1], d[0], d[1]),
        K._seg_dist2(c[0], c[1], a[0], a[1], b[0], b[1]),
        K._seg_dist2(d[0], d[1], a[0], a[1], b[0], b[1]),
    ) <= TOL * TOL


def signed_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def centroid(vertices) -> np.ndarray:
    """Area centroid of a simple polygon."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6.0 * a)


def simplicity_violation(vertices) -> tuple[int, int] | None:
    """First pair of edges (i, j) that breaks simplicity, or None."""
    v = np.asarray(vertices, dtype=float)
    m = len(v)
    for i in range(m):
        a, b = v[i], v[(i + 1) % m]
        if np.all(a == b):
            return (i, (i + 1) % m)
        for j in range(i + 1, m):
            c, d = v[j], v[(j + 1) % m]
            if j == i + 1:
                # adjacent edges share b == c; they may only fold back on each other
                e1, e2 = b - a, d - c
                if e1[0] * e2[1] - e1[1] * e2[0] == 0.0 and e1 @ e2 < 0.0:
                    return (i, j)
                continue
            if i == 0 and j == m - 1:
                e1, e2 = b - a, d - c
                if e1[0] * e2[1] - e1[1] * e2[0] == 0.0 and e1 @ e2 < 0.0:
                    return (i, j)
                continue
            if _segments_touch(a, b, c, d):
                return (i, j)
    return None


@dataclass(frozen=True)
class ObjectShape:
    vertices: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError("vertices must be an (m, 2) array")
        if not np.all(np.isfinite(v)):
            raise GeometryError("vertices must be finite")
        if self.validate:
            if len(v) < 3:
                raise GeometryError("object polygon needs at least 3 vertices")
            bad = simplicity_violation(v)
            if bad is not None:
                raise GeometryError(f"object polygon is not simple (edge {bad[0]} × edge {bad[1]})")
            if signed_area(v) <= 0.0:
                raise GeometryError("object polygon must be counter-clockwise")
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)

    def __eq__(self, other):
        return isinstance(other, ObjectShape) and np.array_equal(self.vertices, other.vertices)

    __hash__ = None

    @property
    def centroid(self) -> np.ndarray:
        return centroid(self.vertices)

    @property
    def diameter(self) -> float:
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())


@dataclass(frozen=True)
class Obstacle:
    kind: str
    a: tuple
    b: tuple | None = None
    radius: float = 0.0
    component_id: int = 0

    def __post_init__(self):
        if self.kind not in ("disc", "capsule"):
            raise GeometryError(f"unknown obstacle kind {self.kind!r}")
        if not (math.isfinite(self.radius) and self.radius >= 0.0):
            raise GeometryError("obstacle radius must be finite and >= 0")
        a = tuple(float(x) for x in self.a)
        object.__setattr__(self, "a", a)
        if self.kind == "capsule":
            b = tuple(float(x) for x in self.b)
            object.__setattr__(self, "b", b)
        if not all(math.isfinite(x) for x in a + (self.b or ())):
            raise GeometryError("obstacle coordinates must be finite")

    @classmethod
    def disc(cls, center, radius, component_id=0):
        return cls("disc", tuple(center), None, float(radius), int(component_id))

    @classmethod
    def capsule(cls, a, b, radius, component_id=0):
        """Capsule around segment a-b; coincident endpoints degrade to a disc."""
        if tuple(map(float, a)) == tuple(map(float, b)):
            return cls.disc(a, radius, component_id)
        return cls("capsule", tuple(a), tuple(b), float(radius), int(component_id))

    def transformed(self, p: Pose) -> "Obstacle":
        a = tuple(p.apply(self.a))
        if self.kind == "disc":
            return Obstacle.disc(a, self.radius, self.component_id)
        return Obstacle.capsule(a, tuple(p.apply(self.b)), self.radius, self.component_id)

    def extent(self) -> tuple[np.ndarray, np.ndarray]:
        pts = np.array([self.a] if self.kind == "disc" else [self.a, self.b])
        return pts.min(0) - self.radius, pts.max(0) + self.radius


def pack_obstacles(cage) -> tuple[np.ndarray, np.ndarray]:
    discs = np.array([[*o.a, o.radius] for o in cage if o.kind == "disc"], dtype=float).reshape(-1, 3)
    caps = np.array([[*o.a, *o.b, o.radius] for o in cage if o.kind == "capsule"], dtype=float).reshape(-1, 5)
    return discs, caps


@dataclass(frozen=True)
class Scene:
    object: ObjectShape
    cage: tuple = ()
    name: str = "scene"

    def __post_init__(self):
        cage = tuple(self.cage)
        object.__setattr__(self, "cage", cage)
        ids = sorted({o.component_id for o in cage})
        if ids != list(range(len(ids))):
            raise GeometryError("component ids must form a contiguous range 0..p-1")
        discs, caps = pack_obstacles(cage)
        object.__setattr__(self, "_discs", discs)
        object.__setattr__(self, "_caps", caps)

    @property
    def n_components(self) -> int:
        return len({o.component_id for o in self.cage})

    @property
    def packed(self):
        return self._discs, self._caps

    def cage_bounds(self):
        """(lo, hi) corners of the cage's bounding box, or None when the cage is empty."""
        if not self.cage:
            return None
        ext = [o.extent() for o in self.cage]
        return np.min([e[0] for e in ext], 0), np.max([e[1] for e in ext], 0)

    def cage_circle(self):
        """Center and radius of a circle around every obstacle (origin, 0 when empty)."""
        b = self.cage_bounds()
        if b is None:
            return np.zeros(2), 0.0
        c = 0.5 * (b[0] + b[1])
        r = 0.0
        for o in self.cage:
            for p in [o.a] if o.kind == "disc" else [o.a, o.b]:
                r = max(r, float(np.hypot(*(np.asarray(p) - c))) + o.radius)
        return c, r


def transform_shape(p: Pose, s: ObjectShape) -> ObjectShape:
    return ObjectShape(p.apply(s.vertices), validate=False)


def _gap(s: ObjectShape, cage) -> float:
    if isinstance(cage, Scene):
        discs, caps = cage.packed
    else:
        discs, caps = pack_obstacles(cage)
    return K.gap(np.ascontiguousarray(s.vertices), discs, caps)


def intersects(s: ObjectShape, cage) -> bool:
    """True iff some obstacle meets the closed polygon region."""
    return _gap(s, cage) <= TOL


def clearance(s: ObjectShape, cage) -> float:
    """Distance from the polygon region to the nearest obstacle surface; 0 on contact, inf if no obstacles."""
    g = _gap(s, cage)
    return 0.0 if g <= TOL else float(g)


def bounding_radius(s: ObjectShape, about) -> float:
    d = s.vertices - np.asarray(about, dtype=float)
    return float(np.sqrt((d**2).sum(1)).max())
