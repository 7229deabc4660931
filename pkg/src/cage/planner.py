"""Configuration-space search over a planar pose grid.

Nodes are free cell-center placements (plus the query poses); two nodes are
adjacent when a single simple move, tried on log branches ``0, +1, -1, ...,
+-k_max``, certifies free.  Breadth-first search over that graph gives the
minimal number of simple moves between placements at the chosen resolution.
Reachability and move counts are certified upper bounds; unreachability and
lower bounds only hold relative to the grid and ``k_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from . import _kernels as K
from .geometry import Scene
from .lie import Pose, Twist, rotation_2d
from .sweep import MAX_DEPTH, PiecewiseMove, SweepVerdict, certify_piecewise

DENSE_SAMPLES = 4096
GOAL_CHUNK = 1024


class PlannerError(ValueError):
    pass


@dataclass(frozen=True)
class PoseGrid:
    """Cell centers ``lo + i (hi - lo) / n`` in x and y, and ``i 2 pi / ntheta`` in angle.

    Centers are placed so that doubling a count keeps every old center.
    """

    x_range: tuple
    y_range: tuple
    nx: int = 64
    ny: int = 64
    ntheta: int = 72
    k_max: int = 2

    def __post_init__(self):
        object.__setattr__(self, "x_range", tuple(float(v) for v in self.x_range))
        object.__setattr__(self, "y_range", tuple(float(v) for v in self.y_range))
        if self.nx < 2 or self.ny < 2:
            raise PlannerError("grid needs nx, ny >= 2")
        if self.ntheta < 4:
            raise PlannerError("grid needs ntheta >= 4")
        if self.k_max < 0:
            raise PlannerError("k_max must be >= 0")
        if not (self.x_range[0] < self.x_range[1] and self.y_range[0] < self.y_range[1]):
            raise PlannerError("grid ranges must be increasing")

    @property
    def shape(self):
        return (self.nx, self.ny, self.ntheta)

    @property
    def size(self) -> int:
        return self.nx * self.ny * self.ntheta

    @property
    def dx(self) -> float:
        return (self.x_range[1] - self.x_range[0]) / self.nx

    @property
    def dy(self) -> float:
        return (self.y_range[1] - self.y_range[0]) / self.ny

    @property
    def dtheta(self) -> float:
        return 2.0 * math.pi / self.ntheta

    def xs(self):
        return self.x_range[0] + self.dx * np.arange(self.nx)

    def ys(self):
        return self.y_range[0] + self.dy * np.arange(self.ny)

    def thetas(self):
        return self.dtheta * np.arange(self.ntheta)

    def with_counts(self, nx, ny, ntheta) -> "PoseGrid":
        return PoseGrid(self.x_range, self.y_range, nx, ny, ntheta, self.k_max)

    def note(self) -> str:
        return (
            f"grid {self.nx}x{self.ny}x{self.ntheta} over x[{self.x_range[0]:g},{self.x_range[1]:g}] "
            f"y[{self.y_range[0]:g},{self.y_range[1]:g}], k_max={self.k_max}; "
            "ell is a certified upper bound, lower bounds and unreachability are resolution-relative"
        )


def default_grid(scene: Scene, nx=64, ny=64, ntheta=72, k_max=2) -> PoseGrid:
    """Square grid around the cage reaching two object diameters past its bounding circle."""
    c, r = scene.cage_circle()
    h = r + 2.0 * scene.object.diameter
    return PoseGrid((c[0] - h, c[0] + h), (c[1] - h, c[1] + h), nx, ny, ntheta, k_max)


def placement(scene: Scene, x: float, y: float, theta: float) -> Pose:
    """Pose putting the object's centroid at (x, y), rotated by theta about it."""
    R = rotation_2d(theta)
    return Pose(R, np.array([x, y]) - R @ scene.object.centroid)


def placement_coords(scene: Scene, p: Pose) -> tuple[float, float, float]:
    c = p.apply(scene.object.centroid)
    return float(c[0]), float(c[1]), p.theta


def _pack(p: Pose) -> np.ndarray:
    return np.array([p.theta, p.translation[0], p.translation[1]])


def _unpack(row) -> Pose:
    return Pose(rotation_2d(row[0]), np.array([row[1], row[2]]))


def cell_poses(scene: Scene, grid: PoseGrid) -> np.ndarray:
    """Packed (theta, tx, ty) of every cell, flattened in (ix, iy, itheta) order."""
    c = scene.object.centroid
    X, Y, T = np.meshgrid(grid.xs(), grid.ys(), grid.thetas(), indexing="ij")
    cos, sin = np.cos(T), np.sin(T)
    tx = X - (cos * c[0] - sin * c[1])
    ty = Y - (sin * c[0] + cos * c[1])
    return np.ascontiguousarray(np.stack([T, tx, ty], -1).reshape(-1, 3))


@dataclass
class FreeSpace:
    grid: PoseGrid
    free: np.ndarray  # bool, grid.shape
    poses: np.ndarray = field(repr=False)  # packed cell poses, flattened

    @property
    def free_indices(self) -> np.ndarray:
        return np.flatnonzero(self.free.ravel())

    def cell_pose(self, flat_index: int) -> Pose:
        return _unpack(self.poses[flat_index])


def _arrays(scene: Scene):
    discs, caps = scene.packed
    return np.ascontiguousarray(scene.object.vertices), discs, caps


def check_grid(scene: Scene, grid: PoseGrid):
    b = scene.cage_bounds()
    if b is None:
        return
    D = scene.object.diameter
    lo, hi = b[0] - D, b[1] + D
    if (grid.x_range[0] > lo[0] or grid.x_range[1] < hi[0]
            or grid.y_range[0] > lo[1] or grid.y_range[1] < hi[1]):
        raise PlannerError("grid does not cover cage")


def build_free_space(scene: Scene, grid: PoseGrid) -> FreeSpace:
    """Collision test at every cell center."""
    check_grid(scene, grid)
    poses = cell_poses(scene, grid)
    g = K.gaps_batch(*_arrays(scene), poses)
    return FreeSpace(grid, (g > K.TOL).reshape(grid.shape), poses)


def is_free(scene: Scene, p: Pose) -> bool:
    V, discs, caps = _arrays(scene)
    return bool(K.gaps_batch(V, discs, caps, _pack(p)[None])[0] > K.TOL)


def edge_exists(scene: Scene, a: Pose, b: Pose, k_max: int = 2) -> tuple[bool, Twist | None]:
    """First branch (0, +1, -1, ...) whose simple move from a to b certifies free."""
    ok, tw = K.edge(*_arrays(scene), _pack(a), _pack(b), k_max, False, np.zeros(1), MAX_DEPTH)
    if not ok:
        return False, None
    return True, Twist(tw[:2], float(tw[2]))


# -- components -------------------------------------------------------------


def neighbor_moves(scene: Scene, fs: FreeSpace):
    """(from, to, twist) for every 6-neighbor pair of free cells.

    x/y neighbors are joined by a one-cell translation, angle neighbors by a
    one-bin rotation about the object's centroid.
    """
    grid = fs.grid
    idx = np.arange(grid.size).reshape(grid.shape)
    free = fs.free
    src, dst, tw = [], [], []

    def add(a_idx, b_idx, mask, twist_fn):
        a = a_idx[mask]
        b = b_idx[mask]
        src.append(a)
        dst.append(b)
        tw.append(twist_fn(a))

    m = free[:-1] & free[1:]
    add(idx[:-1], idx[1:], m, lambda a: np.tile([grid.dx, 0.0, 0.0], (len(a), 1)))
    m = free[:, :-1] & free[:, 1:]
    add(idx[:, :-1], idx[:, 1:], m, lambda a: np.tile([0.0, grid.dy, 0.0], (len(a), 1)))
    nxt = np.roll(idx, -1, axis=2)
    m = free & np.roll(free, -1, axis=2)
    X, Y, _ = np.meshgrid(grid.xs(), grid.ys(), grid.thetas(), indexing="ij")
    d = grid.dtheta

    def rot(a):
        # rotation by d about the centroid (x, y): xi = -omega c
        return np.stack([d * Y.ravel()[a], -d * X.ravel()[a], np.full(len(a), d)], -1)

    add(idx, nxt, m, rot)
    return np.concatenate(src), np.concatenate(dst), np.ascontiguousarray(np.concatenate(tw).astype(float))


@dataclass
class Components:
    labels: np.ndarray  # int, grid.shape; -1 on blocked cells
    count: int

    def census(self) -> list[int]:
        return [int(np.sum(self.labels == i)) for i in range(self.count)]


def connected_components(fs: FreeSpace, scene: Scene) -> Components:
    """Label free cells joined through certified neighbor moves.

    Labels are numbered by the first cell (in (ix, iy, itheta) order) of each class.
    """
    a, b, tw = neighbor_moves(scene, fs)
    codes, _ = K.certify_batch(*_arrays(scene), np.ascontiguousarray(fs.poses[a]), tw, False, MAX_DEPTH)
    ok = codes == K.FREE
    n = fs.grid.size
    adj = coo_matrix((np.ones(int(ok.sum())), (a[ok], b[ok])), shape=(n, n))
    _, raw = _cc(adj, directed=False)
    flat_free = fs.free.ravel()
    labels = np.full(n, -1, dtype=np.int64)
    mapping = {}
    for i in np.flatnonzero(flat_free):
        r = raw[i]
        if r not in mapping:
            mapping[r] = len(mapping)
    lut = np.full(raw.max() + 1, -1, dtype=np.int64)
    for r, v in mapping.items():
        lut[r] = v
    labels[flat_free] = lut[raw[flat_free]]
    return Components(labels.reshape(fs.grid.shape), len(mapping))


# -- search -------------------------------------------------------------------


@dataclass
class EscapeReport:
    ell: int | None  # None means unreachable at resolution
    moves: PiecewiseMove | None
    from_pose: Pose
    to_pose: Pose | None
    resolution_note: str
    verdict: SweepVerdict | None = None
    path_cells: list = field(default_factory=list)

    @property
    def reachable(self) -> bool:
        return self.ell is not None


class _Search:
    """Layered BFS over [source] + free cells + [extra goal]."""

    def __init__(self, scene, fs, source: Pose, goal_pose: Pose | None = None, goal_cells=None,
                 dense=False):
        self.scene = scene
        self.arrays = _arrays(scene)
        self.cells = fs.free_indices
        rows = [_pack(source)[None], fs.poses[self.cells]]
        if goal_pose is not None:
            rows.append(_pack(goal_pose)[None])
        self.nodes = np.ascontiguousarray(np.concatenate(rows))
        n = len(self.nodes)
        if goal_pose is not None:
            self.goals = np.array([n - 1])
        else:
            pos = np.searchsorted(self.cells, goal_cells)
            self.goals = 1 + pos
        self.dense = dense
        self.ts = np.linspace(0.0, 1.0, DENSE_SAMPLES)
        if dense:
            # coarse-to-fine visiting order; same sample set
            self.ts = self.ts[_coarse_to_fine(DENSE_SAMPLES)]
        self.k_max = fs.grid.k_max
        self.parent = np.full(n, -1, dtype=np.int64)
        self.twist = np.zeros((n, 3))
        self.visited = np.zeros(n, dtype=bool)
        self.visited[0] = True

    def _expand(self, frontier, cands):
        if len(cands) == 0 or len(frontier) == 0:
            return np.empty(0, dtype=np.int64), np.empty((0, 3))
        return K.expand(*self.arrays, self.nodes, np.asarray(frontier, dtype=np.int64),
                        np.asarray(cands, dtype=np.int64), self.k_max, self.dense, self.ts, MAX_DEPTH)

    def _settle(self, cands, parent, twist):
        hit = parent >= 0
        new = cands[hit]
        self.parent[new] = parent[hit]
        self.twist[new] = twist[hit]
        self.visited[new] = True
        return new

    def layered(self, max_ell=None):
        """Goal node reached with the fewest moves, or None."""
        goal_mask = np.zeros(len(self.nodes), dtype=bool)
        goal_mask[self.goals] = True
        frontier = np.array([0])
        depth = 0
        while True:
            if max_ell is not None and depth >= max_ell:
                return None
            # goals in index order, chunked: the first chunk with a hit holds the lowest reachable goal
            g = np.flatnonzero(goal_mask & ~self.visited)
            for lo in range(0, len(g), GOAL_CHUNK):
                chunk = g[lo:lo + GOAL_CHUNK]
                found = self._settle(chunk, *self._expand(frontier, chunk))
                if len(found):
                    return int(found[0])
            rest = np.flatnonzero(~goal_mask & ~self.visited)
            frontier = self._settle(rest, *self._expand(frontier, rest))
            if len(frontier) == 0:
                return None
            depth += 1

    def plain(self):
        """Node-at-a-time BFS with the goal test on discovery."""
        goal_mask = np.zeros(len(self.nodes), dtype=bool)
        goal_mask[self.goals] = True
        queue = [0]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            cands = np.flatnonzero(~self.visited)
            new = self._settle(cands, *self._expand([u], cands))
            for v in new:
                if goal_mask[v]:
                    return int(v)
            queue.extend(int(v) for v in new)
        return None

    def path(self, node):
        chain = []
        while node != 0:
            chain.append(node)
            node = int(self.parent[node])
        return chain[::-1]

    def report(self, node, source: Pose, note: str, certify=True) -> EscapeReport:
        if node is None:
            return EscapeReport(None, None, source, None, note)
        chain = self.path(node)
        segs = [Twist(self.twist[v][:2], float(self.twist[v][2])) for v in chain]
        moves = PiecewiseMove(source, segs)
        verdict = certify_piecewise(self.scene, moves) if certify else None
        cells = [int(self.cells[v - 1]) for v in chain if 1 <= v <= len(self.cells)]
        return EscapeReport(len(chain), moves, source, _unpack(self.nodes[node]), note, verdict, cells)


def _coarse_to_fine(n: int) -> np.ndarray:
    order = []
    seen = np.zeros(n, dtype=bool)
    step = 1 << (n.bit_length() - 1)
    while step >= 1:
        for i in range(0, n, step):
            if not seen[i]:
                seen[i] = True
                order.append(i)
        step //= 2
    return np.array(order)


def _query_check(scene, *poses):
    for p in poses:
        if not is_free(scene, p):
            raise PlannerError("query pose not in K^c")


def _same_pose(a: Pose, b: Pose) -> bool:
    return a.allclose(b, atol=1e-12)


def min_simple_moves(scene: Scene, start: Pose, goal: Pose, grid: PoseGrid,
                     free_space: FreeSpace | None = None, max_ell: int | None = None) -> EscapeReport:
    """Fewest certified simple moves from ``start`` to ``goal`` through free grid placements.

    With ``max_ell`` the search stops after that many moves and reports
    unreachable, which then only means "more than max_ell".
    """
    _query_check(scene, start, goal)
    note = grid.note()
    if _same_pose(start, goal):
        return EscapeReport(0, None, start, goal, note)
    fs = free_space or build_free_space(scene, grid)
    s = _Search(scene, fs, start, goal_pose=goal)
    rep = s.report(s.layered(max_ell), start, note)
    if rep.reachable:
        rep.to_pose = goal
        if not rep.verdict.free:
            raise PlannerError(f"witness failed end-to-end certification: {rep.verdict}")
    return rep


def brute_force_min_moves(scene: Scene, start: Pose, goal: Pose, grid: PoseGrid,
                          free_space: FreeSpace | None = None) -> EscapeReport:
    """Reference search: plain BFS with edges judged by 4096-sample dense collision checks."""
    _query_check(scene, start, goal)
    note = grid.note() + "; oracle (dense sampling)"
    if _same_pose(start, goal):
        return EscapeReport(0, None, start, goal, note)
    fs = free_space or build_free_space(scene, grid)
    s = _Search(scene, fs, start, goal_pose=goal, dense=True)
    rep = s.report(s.plain(), start, note)
    if rep.reachable:
        rep.to_pose = goal
    return rep


def exterior_cells(scene: Scene, fs: FreeSpace) -> np.ndarray:
    """Free cells whose object lies outside the cage circle grown by one object diameter."""
    c, r = scene.cage_circle()
    R = r + scene.object.diameter
    idx = fs.free_indices
    V = scene.object.vertices
    return idx[_outside(V, fs.poses[idx], c, R)]


def _outside(V, packed, c, R) -> np.ndarray:
    out = np.empty(len(packed), dtype=bool)
    P = np.empty_like(V)
    for i, row in enumerate(packed):
        K.pose_vertices(np.ascontiguousarray(V), row[0], row[1], row[2], P)
        out[i] = K.point_region_dist(c[0], c[1], P) > R + K.TOL
    return out


def escape_to_exterior(scene: Scene, start: Pose, grid: PoseGrid,
                       free_space: FreeSpace | None = None, oracle: bool = False) -> EscapeReport:
    """Fewest simple moves from ``start`` to any placement clear of the cage's neighborhood."""
    _query_check(scene, start)
    fs = free_space or build_free_space(scene, grid)
    targets = exterior_cells(scene, fs)
    if len(targets) == 0:
        raise PlannerError("grid has no exterior")
    note = grid.note() + ("; oracle (dense sampling)" if oracle else "")
    c, r = scene.cage_circle()
    if _outside(scene.object.vertices, _pack(start)[None], c, r + scene.object.diameter)[0]:
        return EscapeReport(0, None, start, start, note)
    s = _Search(scene, fs, start, goal_cells=targets, dense=oracle)
    node = s.plain() if oracle else s.layered()
    rep = s.report(node, start, note, certify=not oracle)
    if rep.reachable and not oracle and not rep.verdict.free:
        raise PlannerError(f"witness failed end-to-end certification: {rep.verdict}")
    return rep


# -- classification -----------------------------------------------------------


@dataclass(frozen=True)
class CagingClassification:
    verdict: str  # "congruent_set" | "complete_caging_set" | "dissociated"
    component_count: int
    ell0: int | None = None
    witness: tuple | None = None  # pair of poses for a dissociation

    def __post_init__(self):
        if self.verdict == "complete_caging_set" and self.component_count < 2:
            raise ValueError("a complete caging set needs at least two components")


def landmarks(scene: Scene, fs: FreeSpace, comps: Components, extra_poses=()) -> list[Pose]:
    """Eight extreme free cells per component (min/max of x, y, x+y, x-y), then free extra poses."""
    X, Y, _ = np.meshgrid(fs.grid.xs(), fs.grid.ys(), fs.grid.thetas(), indexing="ij")
    X, Y, lab = X.ravel(), Y.ravel(), comps.labels.ravel()
    out, seen = [], set()
    for c in range(comps.count):
        idx = np.flatnonzero(lab == c)
        for key in (X, Y, X + Y, X - Y):
            for pick in (np.argmin(key[idx]), np.argmax(key[idx])):
                i = int(idx[pick])
                if i not in seen:
                    seen.add(i)
                    out.append(fs.cell_pose(i))
    for p in extra_poses:
        if is_free(scene, p):
            out.append(p)
    return out


def classify_caging(scene: Scene, grid: PoseGrid, ell0: int, poses=(),
                    free_space: FreeSpace | None = None) -> CagingClassification:
    """Complete caging set if the free space splits, else dissociated at ``ell0`` if some
    landmark pair needs ``ell0`` or more simple moves, else a congruent set."""
    if ell0 < 1:
        raise PlannerError("ell0 must be >= 1")
    fs = free_space or build_free_space(scene, grid)
    comps = connected_components(fs, scene)
    if comps.count >= 2:
        return CagingClassification("complete_caging_set", comps.count)
    marks = landmarks(scene, fs, comps, poses)
    for i in range(len(marks)):
        for j in range(i + 1, len(marks)):
            if _same_pose(marks[i], marks[j]):
                continue
            rep = min_simple_moves(scene, marks[i], marks[j], grid, fs, max_ell=ell0 - 1)
            if not rep.reachable:
                return CagingClassification("dissociated", comps.count, ell0, (marks[i], marks[j]))
    return CagingClassification("congruent_set", comps.count)
