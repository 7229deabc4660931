import math
from collections import deque

import numpy as np
import pytest

from cage import _kernels as K
from cage.geometry import Obstacle, ObjectShape, Scene, intersects, transform_shape
from cage.lie import NoScrewOnBranch, Pose, compose, inverse, log_pose
from cage.planner import (
    PlannerError, PoseGrid, brute_force_min_moves, build_free_space, cell_poses, classify_caging,
    connected_components, edge_exists, escape_to_exterior, exterior_cells, min_simple_moves, placement,
    placement_coords,
)
from cage.sweep import certify_piecewise, dense_collision, straight_move

COARSE = (16, 16, 24)


def grid_of(sf, counts=COARSE, k_max=None):
    return sf.pose_grid(counts, k_max)


# -- grid ------------------------------------------------------------------------

def test_grid_centers_are_nested():
    g = PoseGrid((-4, 4), (-2, 2), 16, 8, 24)
    h = g.with_counts(32, 16, 48)
    for a, b in ((g.xs(), h.xs()), (g.ys(), h.ys()), (g.thetas(), h.thetas())):
        assert np.all(np.isin(a, b))


def test_grid_validation(corpus):
    with pytest.raises(PlannerError):
        PoseGrid((0, 1), (0, 1), 1, 4, 8)
    with pytest.raises(PlannerError):
        PoseGrid((0, 1), (0, 1), 4, 4, 3)
    sc = corpus["bar_in_box"].scene
    with pytest.raises(PlannerError, match="grid does not cover cage"):
        build_free_space(sc, PoseGrid((-2, 2), (-2, 2), 8, 8, 8))


def test_placement_puts_centroid(corpus):
    sc = corpus["figure1_nshape"].scene
    p = placement(sc, 1.5, -0.5, 0.7)
    assert np.allclose(p.apply(sc.object.centroid), [1.5, -0.5])
    assert np.allclose(placement_coords(sc, p), (1.5, -0.5, 0.7))


# -- free space ----------------------------------------------------------------------

def test_empty_cage_all_free(corpus):
    sf = corpus["empty_cage"]
    fs = build_free_space(sf.scene, grid_of(sf))
    assert fs.free.all()


def test_ring_free_space_matches_cell_scan(corpus):
    sf = corpus["disc_ring"]
    sc, g = sf.scene, grid_of(sf)
    fs = build_free_space(sc, g)
    scan = np.array([
        not intersects(transform_shape(Pose.planar(*row[1:], row[0]), sc.object), sc)
        for row in cell_poses(sc, g)
    ]).reshape(g.shape)
    assert np.array_equal(fs.free, scan)
    ix, iy = np.argmin(np.abs(g.xs())), np.argmin(np.abs(g.ys()))
    assert fs.free[ix, iy].any()


def test_large_object_has_no_false_free_cells():
    big = ObjectShape([[-3, -3], [3, -3], [3, 3], [-3, 3]])
    cage = tuple(Obstacle.disc((x, y), 0.2) for x in (-1, 0, 1) for y in (-1, 0, 1))
    sc = Scene(big, cage)
    g = PoseGrid((-10, 10), (-10, 10), 20, 20, 8)
    fs = build_free_space(sc, g)
    X, Y, _ = np.meshgrid(g.xs(), g.ys(), g.thetas(), indexing="ij")
    # a centered square of half-size 3 covers the origin disc at any angle
    assert not fs.free[np.hypot(X, Y) <= 2].any()
    assert fs.free.any()
    for i in fs.free_indices[::37]:
        assert not intersects(transform_shape(fs.cell_pose(i), big), sc)


# -- edges -----------------------------------------------------------------------------

def test_edge_empty_cage(corpus, rng):
    sc = corpus["empty_cage"].scene
    for _ in range(20):
        a = Pose.planar(*rng.uniform(-3, 3, 3))
        b = Pose.planar(*rng.uniform(-3, 3, 3))
        ok, tw = edge_exists(sc, a, b)
        assert ok
        assert tw.angle == pytest.approx(log_pose(compose(b, inverse(a)), 0).angle)


def test_edge_same_pose(corpus):
    sf = corpus["square_disc"]
    a = sf.pose("left")
    ok, tw = edge_exists(sf.scene, a, a)
    assert ok and not np.any(tw.xi) and tw.omega == 0.0


def test_wall_blocks_every_branch(corpus):
    sf = corpus["wall_gap"]
    a, b = sf.pose("left"), sf.pose("right")
    ok, tw = edge_exists(sf.scene, a, b, k_max=2)
    assert not ok and tw is None
    assert a.theta == b.theta
    # equal angles: k != 0 would be a full turn, which has no screw for a nonzero shift
    for k in (1, -1, 2, -2):
        with pytest.raises(NoScrewOnBranch):
            log_pose(compose(b, inverse(a)), k)
    assert dense_collision(sf.scene, straight_move(a, b, 0)) is not None


# -- components ------------------------------------------------------------------------

def flood_fill(sc, fs):
    """Label free cells by BFS over grid neighbors, edges judged by dense sampling."""
    g = fs.grid
    V = np.ascontiguousarray(sc.object.vertices)
    discs, caps = sc.packed
    ts = np.linspace(0, 1, 4096)
    free = fs.free
    pairs = []
    for ix in range(g.nx):
        for iy in range(g.ny):
            for it in range(g.ntheta):
                if not free[ix, iy, it]:
                    continue
                for j in ((ix + 1, iy, it), (ix, iy + 1, it), (ix, iy, (it + 1) % g.ntheta)):
                    if j[0] < g.nx and j[1] < g.ny and free[j]:
                        pairs.append((np.ravel_multi_index((ix, iy, it), g.shape), np.ravel_multi_index(j, g.shape)))
    pairs = np.array(pairs)
    starts, twists = [], []
    for a, b in pairs:
        pa, pb = fs.cell_pose(a), fs.cell_pose(b)
        tw = log_pose(compose(pb, inverse(pa)), 0)
        starts.append(fs.poses[a])
        twists.append([tw.xi[0], tw.xi[1], tw.omega])
    ok = K.dense_batch(V, discs, caps, np.array(starts), np.array(twists), ts)
    adj = {}
    for (a, b), e in zip(pairs, ok):
        if e:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
    label = {}
    for s in fs.free_indices:
        if s in label:
            continue
        label[s] = len(set(label.values()))
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj.get(u, ()):
                if v not in label:
                    label[v] = label[s]
                    q.append(v)
    return label


def test_empty_cage_one_component(corpus):
    sf = corpus["empty_cage"]
    fs = build_free_space(sf.scene, grid_of(sf))
    assert connected_components(fs, sf.scene).count == 1


def test_bar_components_match_flood_fill(corpus):
    sf = corpus["bar_in_box"]
    fs = build_free_space(sf.scene, grid_of(sf))
    comps = connected_components(fs, sf.scene)
    oracle = flood_fill(sf.scene, fs)
    assert comps.count >= 2
    assert comps.count == len(set(oracle.values()))
    flat = comps.labels.ravel()
    assert all(flat[i] == lab for i, lab in oracle.items())


def test_figure1_one_component(corpus):
    sf = corpus["figure1_nshape"]
    fs = build_free_space(sf.scene, grid_of(sf))
    assert connected_components(fs, sf.scene).count == 1


# -- moves -----------------------------------------------------------------------------

def test_same_pose_is_zero_moves(corpus):
    sf = corpus["square_disc"]
    rep = min_simple_moves(sf.scene, sf.pose("left"), sf.pose("left"), grid_of(sf))
    assert rep.ell == 0 and rep.moves is None
    rep = brute_force_min_moves(sf.scene, sf.pose("left"), sf.pose("left"), grid_of(sf))
    assert rep.ell == 0


def test_colliding_query_rejected(corpus):
    sf = corpus["square_disc"]
    with pytest.raises(PlannerError, match="query pose not in K"):
        min_simple_moves(sf.scene, placement(sf.scene, 0, 0, 0), sf.pose("left"), grid_of(sf))


def test_empty_cage_one_move(corpus, rng):
    sf = corpus["empty_cage"]
    g = grid_of(sf)
    fs = build_free_space(sf.scene, g)
    for _ in range(10):
        a = placement(sf.scene, *rng.uniform(-3, 3, 2), rng.uniform(-math.pi, math.pi))
        b = placement(sf.scene, *rng.uniform(-3, 3, 2), rng.uniform(-math.pi, math.pi))
        assert min_simple_moves(sf.scene, a, b, g, fs).ell == 1
    assert brute_force_min_moves(sf.scene, a, b, g, fs).ell == 1


@pytest.mark.parametrize("name,ell", [("square_disc", 2), ("wall_gap", 2), ("figure1_nshape", 2)])
def test_witness_is_certified(corpus, name, ell):
    sf = corpus[name]
    a, b = (sf.pose(k) for k in sf.poses)
    rep = min_simple_moves(sf.scene, a, b, grid_of(sf))
    assert rep.ell == ell == len(rep.moves)
    assert certify_piecewise(sf.scene, rep.moves).free
    assert rep.moves.end.allclose(b, atol=1e-9)
    for p in rep.moves.endpoints():
        assert not intersects(transform_shape(p, sf.scene.object), sf.scene)
    assert "16x16x24" in rep.resolution_note and "k_max=2" in rep.resolution_note


def test_determinism(corpus):
    sf = corpus["figure1_nshape"]
    g = grid_of(sf)
    r1 = min_simple_moves(sf.scene, sf.pose("caged"), sf.pose("free"), g)
    r2 = min_simple_moves(sf.scene, sf.pose("caged"), sf.pose("free"), g)
    assert r1.path_cells == r2.path_cells
    for x, y in zip(r1.moves.segments, r2.moves.segments):
        assert np.array_equal(x.xi, y.xi) and x.omega == y.omega


@pytest.mark.parametrize("name", ["square_disc", "wall_gap", "figure1_nshape"])
def test_monotone_resolution(corpus, name):
    sf = corpus[name]
    a, b = (sf.pose(k) for k in sf.poses)
    ells = [min_simple_moves(sf.scene, a, b, grid_of(sf, c)).ell for c in ((8, 8, 12), COARSE, (32, 32, 48))]
    ells = [math.inf if e is None else e for e in ells]
    assert ells[0] >= ells[1] >= ells[2]


def test_component_containment(corpus, rng):
    for name in ("bar_in_box", "square_disc"):
        sf = corpus[name]
        g = grid_of(sf)
        fs = build_free_space(sf.scene, g)
        comps = connected_components(fs, sf.scene)
        lab = comps.labels.ravel()
        cells = fs.free_indices
        picks = [cells[0], cells[-1]] + [c for c in cells if lab[c] > 0][:2] + list(rng.choice(cells, 4))
        for i in range(0, len(picks) - 1, 2):
            a, b = fs.cell_pose(picks[i]), fs.cell_pose(picks[i + 1])
            rep = min_simple_moves(sf.scene, a, b, g, fs)
            if rep.reachable:
                assert lab[picks[i]] == lab[picks[i + 1]]


# -- escape and classification -----------------------------------------------------------

def test_escape_examples(corpus):
    sf = corpus["empty_cage"]
    assert escape_to_exterior(sf.scene, sf.pose("a"), grid_of(sf)).ell == 1
    sf = corpus["figure1_nshape"]
    rep = escape_to_exterior(sf.scene, sf.pose("caged"), grid_of(sf))
    assert rep.reachable and rep.ell >= 2
    assert certify_piecewise(sf.scene, rep.moves).free
    assert escape_to_exterior(sf.scene, sf.pose("caged"), grid_of(sf), oracle=True).ell == rep.ell
    sf = corpus["bar_in_box"]
    rep = escape_to_exterior(sf.scene, sf.pose("inside"), grid_of(sf))
    assert not rep.reachable and rep.moves is None


def test_escape_target_set(corpus):
    sf = corpus["figure1_nshape"]
    fs = build_free_space(sf.scene, grid_of(sf))
    c, r = sf.scene.cage_circle()
    R = r + sf.scene.object.diameter
    for i in exterior_cells(sf.scene, fs):
        P = transform_shape(fs.cell_pose(i), sf.scene.object).vertices
        assert np.min(np.linalg.norm(P - c, axis=1)) > R


def test_no_exterior(corpus):
    sf = corpus["empty_cage"]
    with pytest.raises(PlannerError, match="grid has no exterior"):
        escape_to_exterior(sf.scene, sf.pose("a"), PoseGrid((-0.5, 0.5), (-0.5, 0.5), 4, 4, 4))


def test_classification_examples(corpus):
    sf = corpus["empty_cage"]
    assert classify_caging(sf.scene, grid_of(sf, (8, 8, 12)), 2).verdict == "congruent_set"
    sf = corpus["bar_in_box"]
    cl = classify_caging(sf.scene, grid_of(sf), 2)
    assert cl.verdict == "complete_caging_set" and cl.component_count >= 2
    sf = corpus["figure1_nshape"]
    poses = [sf.pose(k) for k in sf.poses]
    cl = classify_caging(sf.scene, grid_of(sf), 2, poses)
    assert cl.verdict == "dissociated" and cl.ell0 == 2 and cl.witness is not None
    with pytest.raises(PlannerError):
        classify_caging(sf.scene, grid_of(sf), 0)
