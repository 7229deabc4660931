"""Certify that a simple or piecewise euclidean move keeps the object clear of the cage.

A move is checked on the closed interval ``t in [0, 1]`` by bisection: at each
interval midpoint the posed object is tested for contact; if it is clear by more
than ``speed_bound * half_width`` the whole interval is certified.  ``Free`` is
therefore sound; grazing contact ends in ``Colliding`` or ``Unknown``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .geometry import ObjectShape, Scene
from .lie import Pose, Twist, compose, exp_twist, inverse, log_pose

MAX_DEPTH = 32


@dataclass(frozen=True)
class SimpleMove:
    twist: Twist
    start: Pose

    def pose_at(self, t: float) -> Pose:
        return compose(exp_twist(self.twist, t), self.start)

    @property
    def end(self) -> Pose:
        return self.pose_at(1.0)


@dataclass(frozen=True)
class PiecewiseMove:
    start: Pose
    segments: tuple

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if len(self.segments) < 1:
            raise ValueError("a piecewise move needs at least one segment")

    def __len__(self):
        return len(self.segments)

    def simple_moves(self) -> list[SimpleMove]:
        out = []
        p = self.start
        for g in self.segments:
            m = SimpleMove(g, p)
            out.append(m)
            p = m.end
        return out

    def endpoints(self) -> list[Pose]:
        """Poses at t_0, ..., t_ell (start first)."""
        return [self.start] + [m.end for m in self.simple_moves()]

    @property
    def end(self) -> Pose:
        return self.endpoints()[-1]

    def pose_at(self, t: float) -> Pose:
        ell = len(self.segments)
        j = min(int(t * ell), ell - 1)
        return self.simple_moves()[j].pose_at(t * ell - j)


@dataclass(frozen=True)
class SweepVerdict:
    outcome: str  # "free" | "colliding" | "unknown"
    t_hit: float | None = None
    reason: str | None = None

    def __post_init__(self):
        if (self.outcome == "colliding") != (self.t_hit is not None):
            raise ValueError("t_hit is present iff the verdict is colliding")

    @property
    def free(self) -> bool:
        return self.outcome == "free"


def _pack_pose(p: Pose) -> np.ndarray:
    return np.array([p.theta, p.translation[0], p.translation[1]])


def _pack_twist(g: Twist) -> np.ndarray:
    if g.n != 2:
        raise ValueError("sweep certification is planar")
    return np.array([g.xi[0], g.xi[1], g.omega])


def velocity_bound(m: SimpleMove, s: ObjectShape) -> float:
    """Largest point speed of the posed object along the move (per unit t).

    The velocity field of a planar twist is ``y' = omega y + xi``; its norm is
    ``|theta| * dist(y, center)`` for rotations and ``|xi|`` for translations,
    and over a polygon it peaks at a vertex.
    """
    return float(K.speed_bound(np.ascontiguousarray(s.vertices), _pack_pose(m.start), _pack_twist(m.twist)))


def _verdict(code: int, t_hit: float) -> SweepVerdict:
    if code == K.FREE:
        return SweepVerdict("free")
    if code == K.COLLIDING:
        return SweepVerdict("colliding", float(t_hit))
    return SweepVerdict("unknown", reason="budget exhausted")


def certify_simple_move(scene: Scene, m: SimpleMove, max_depth: int = MAX_DEPTH) -> SweepVerdict:
    """Verdict for one simple move; a collision reports the earliest contact found."""
    discs, caps = scene.packed
    code, hit = K.certify(
        np.ascontiguousarray(scene.object.vertices), discs, caps,
        _pack_pose(m.start), _pack_twist(m.twist), True, max_depth,
    )
    return _verdict(code, hit)


def certify_piecewise(scene: Scene, m: PiecewiseMove, max_depth: int = MAX_DEPTH) -> SweepVerdict:
    ell = len(m.segments)
    for j, sm in enumerate(m.simple_moves()):
        v = certify_simple_move(scene, sm, max_depth)
        if not v.free:
            if v.outcome == "colliding":
                return SweepVerdict("colliding", (j + v.t_hit) / ell)
            return v
    return SweepVerdict("free")


def dense_collision(scene: Scene, m: SimpleMove, samples: int = 4096) -> float | None:
    """First of ``samples`` uniform parameters (endpoints included) where the object touches the cage."""
    discs, caps = scene.packed
    V = np.ascontiguousarray(scene.object.vertices)
    start, tw = _pack_pose(m.start), _pack_twist(m.twist)
    P = np.empty_like(V)
    for t in np.linspace(0.0, 1.0, samples):
        if K.gap_at(V, discs, caps, start, tw, t, P) <= K.TOL:
            return float(t)
    return None


def straight_move(a: Pose, b: Pose, k: int = 0) -> SimpleMove:
    """The branch-k simple move taking pose a to pose b."""
    return SimpleMove(log_pose(compose(b, inverse(a)), k), a)

