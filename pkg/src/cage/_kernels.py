"""Compiled inner loops for planar collision, clearance and sweep certification.

Planar poses are packed as ``(theta, tx, ty)`` rows and planar twists as
``(xi_x, xi_y, theta)`` rows.  Obstacles are packed as ``discs[:, (cx, cy, r)]``
and ``caps[:, (ax, ay, bx, by, r)]``.
"""

import math
import os

import numba
import numpy as np
from numba import njit, prange

TOL = 1e-12
SWITCH = 1e-4
FREE, COLLIDING, UNKNOWN = 0, 1, 2

if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "workqueue"
if os.environ.get("CAGE_THREADS"):
    numba.set_num_threads(max(1, min(int(os.environ["CAGE_THREADS"]), numba.config.NUMBA_NUM_THREADS)))


@njit(cache=True)
def _seg_dist2(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    L = dx * dx + dy * dy
    t = 0.0
    if L > 0.0:
        t = ((px - ax) * dx + (py - ay) * dy) / L
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    qx = ax + t * dx - px
    qy = ay + t * dy - py
    return qx * qx + qy * qy


@njit(cache=True)
def _inside(px, py, P):
    m = P.shape[0]
    c = False
    j = m - 1
    for i in range(m):
        yi = P[i, 1]
        yj = P[j, 1]
        if (yi > py) != (yj > py):
            xint = P[i, 0] + (py - yi) * (P[j, 0] - P[i, 0]) / (yj - yi)
            if px < xint:
                c = not c
        j = i
    return c


@njit(cache=True)
def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


@njit(cache=True)
def _crosses(ax, ay, bx, by, cx, cy, dx, dy):
    o1 = _orient(ax, ay, bx, by, cx, cy)
    o2 = _orient(ax, ay, bx, by, dx, dy)
    o3 = _orient(cx, cy, dx, dy, ax, ay)
    o4 = _orient(cx, cy, dx, dy, bx, by)
    return o1 * o2 < 0.0 and o3 * o4 < 0.0


@njit(cache=True)
def point_region_dist(px, py, P):
    if _inside(px, py, P):
        return 0.0
    m = P.shape[0]
    best = np.inf
    for i in range(m):
        j = (i + 1) % m
        d = _seg_dist2(px, py, P[i, 0], P[i, 1], P[j, 0], P[j, 1])
        if d < best:
            best = d
    return math.sqrt(best)


@njit(cache=True)
def segment_region_dist(ax, ay, bx, by, P):
    if _inside(ax, ay, P) or _inside(bx, by, P):
        return 0.0
    m = P.shape[0]
    best = np.inf
    for i in range(m):
        j = (i + 1) % m
        cx, cy, dx, dy = P[i, 0], P[i, 1], P[j, 0], P[j, 1]
        if _crosses(ax, ay, bx, by, cx, cy, dx, dy):
            return 0.0
        d = min(
            _seg_dist2(ax, ay, cx, cy, dx, dy),
            _seg_dist2(bx, by, cx, cy, dx, dy),
            _seg_dist2(cx, cy, ax, ay, bx, by),
            _seg_dist2(dx, dy, ax, ay, bx, by),
        )
        if d < best:
            best = d
    return math.sqrt(best)


@njit(cache=True)
def gap(P, discs, caps):
    """min over obstacles of (core-to-region distance - radius); +inf when there are none."""
    best = np.inf
    for i in range(discs.shape[0]):
        d = point_region_dist(discs[i, 0], discs[i, 1], P) - discs[i, 2]
        if d < best:
            best = d
    for i in range(caps.shape[0]):
        d = segment_region_dist(caps[i, 0], caps[i, 1], caps[i, 2], caps[i, 3], P) - caps[i, 4]
        if d < best:
            best = d
    return best


@njit(cache=True)
def pose_vertices(V, theta, tx, ty, out):
    c = math.cos(theta)
    s = math.sin(theta)
    for i in range(V.shape[0]):
        out[i, 0] = c * V[i, 0] - s * V[i, 1] + tx
        out[i, 1] = s * V[i, 0] + c * V[i, 1] + ty


@njit(cache=True)
def vt_apply(theta, t, xx, xy):
    """v_t(theta) @ (xx, xy) for a planar rotation generator."""
    a = theta * t
    if abs(a) < SWITCH:
        # sum_k t^{k+1} omega^k / (k+1)!, omega^k alternates I, J, -I, -J, ...
        s = 0.0
        c = 0.0
        term = t
        for k in range(12):
            r = k % 4
            if r == 0:
                s += term
            elif r == 1:
                c += term
            elif r == 2:
                s -= term
            else:
                c -= term
            term = term * theta * t / (k + 2)
    else:
        s = math.sin(a) / theta
        h = math.sin(0.5 * a)
        c = 2.0 * h * h / theta
    return s * xx - c * xy, c * xx + s * xy


@njit(cache=True)
def move_pose(start, twist, t):
    """Pose (theta, tx, ty) of exp(t g) o start."""
    th = twist[2] * t
    c = math.cos(th)
    s = math.sin(th)
    vx, vy = vt_apply(twist[2], t, twist[0], twist[1])
    return (start[0] + th,
            c * start[1] - s * start[2] + vx,
            s * start[1] + c * start[2] + vy)


@njit(cache=True)
def speed_bound(V, start, twist):
    """max over posed vertices y of |omega y + xi|."""
    P = np.empty_like(V)
    pose_vertices(V, start[0], start[1], start[2], P)
    th = twist[2]
    best = 0.0
    for i in range(P.shape[0]):
        vx = -th * P[i, 1] + twist[0]
        vy = th * P[i, 0] + twist[1]
        v = math.sqrt(vx * vx + vy * vy)
        if v > best:
            best = v
    return best


@njit(cache=True)
def gap_at(V, discs, caps, start, twist, t, P):
    th, tx, ty = move_pose(start, twist, t)
    pose_vertices(V, th, tx, ty, P)
    return gap(P, discs, caps)


@njit(cache=True)
def certify(V, discs, caps, start, twist, earliest, max_depth):
    """Bisection certificate over t in [0, 1]; returns (outcome, t_hit)."""
    L = speed_bound(V, start, twist)
    P = np.empty_like(V)
    sa = np.empty(2 * max_depth + 8)
    sb = np.empty(2 * max_depth + 8)
    sd = np.empty(2 * max_depth + 8, dtype=np.int64)
    n = 1
    sa[0] = 0.0
    sb[0] = 1.0
    sd[0] = 0
    hit = np.inf
    unknown = False
    while n > 0:
        n -= 1
        a = sa[n]
        b = sb[n]
        d = sd[n]
        if a >= hit:
            continue
        m = 0.5 * (a + b)
        h = 0.5 * (b - a)
        g = gap_at(V, discs, caps, start, twist, m, P)
        if g <= TOL:
            if m < hit:
                hit = m
            if not earliest:
                return COLLIDING, hit
            if d < max_depth:
                sa[n] = a
                sb[n] = m
                sd[n] = d + 1
                n += 1
            continue
        if g > L * h:
            continue
        if d >= max_depth:
            unknown = True
            continue
        sa[n] = m
        sb[n] = b
        sd[n] = d + 1
        sa[n + 1] = a
        sb[n + 1] = m
        sd[n + 1] = d + 1
        n += 2
    if hit < np.inf:
        return COLLIDING, hit
    if unknown:
        return UNKNOWN, np.nan
    return FREE, np.nan


@njit(cache=True)
def dense_free(V, discs, caps, start, twist, ts):
    P = np.empty_like(V)
    for i in range(ts.shape[0]):
        if gap_at(V, discs, caps, start, twist, ts[i], P) <= TOL:
            return False
    return True


@njit(cache=True)
def wrap(a):
    two_pi = 2.0 * math.pi
    a = a - two_pi * np.round(a / two_pi)
    if a > math.pi:
        a -= two_pi
    if a <= -math.pi:
        a += 2.0 * math.pi
    return a


@njit(cache=True)
def log_rel(a, b, k):
    """Branch-k twist g with exp(g) o a = b; ok=False when the branch has no screw."""
    base = wrap(b[0] - a[0])
    th = base + 2.0 * math.pi * k
    c = math.cos(base)
    s = math.sin(base)
    ux = b[1] - (c * a[1] - s * a[2])
    uy = b[2] - (s * a[1] + c * a[2])
    out = np.zeros(3)
    out[2] = th
    if th == 0.0:
        out[0] = ux
        out[1] = uy
        return True, out
    if base == 0.0:
        if ux != 0.0 or uy != 0.0:
            return False, out
        return True, out
    sv = math.sin(th) / th
    h = math.sin(0.5 * th)
    cv = 2.0 * h * h / th
    det = sv * sv + cv * cv
    out[0] = (sv * ux + cv * uy) / det
    out[1] = (-cv * ux + sv * uy) / det
    return True, out


@njit(cache=True)
def edge(V, discs, caps, a, b, kmax, dense, ts, max_depth):
    """First branch in order 0, +1, -1, ... whose simple move a -> b is free."""
    for j in range(2 * kmax + 1):
        k = (j + 1) // 2
        if j % 2 == 0:
            k = -k
        ok, tw = log_rel(a, b, k)
        if not ok:
            continue
        if dense:
            if dense_free(V, discs, caps, a, tw, ts):
                return True, tw
        else:
            code, _ = certify(V, discs, caps, a, tw, False, max_depth)
            if code == FREE:
                return True, tw
    return False, np.zeros(3)


@njit(cache=True, parallel=True)
def gaps_batch(V, discs, caps, poses):
    n = poses.shape[0]
    out = np.empty(n)
    for i in prange(n):
        P = np.empty_like(V)
        pose_vertices(V, poses[i, 0], poses[i, 1], poses[i, 2], P)
        out[i] = gap(P, discs, caps)
    return out


@njit(cache=True, parallel=True)
def certify_batch(V, discs, caps, starts, twists, earliest, max_depth):
    n = starts.shape[0]
    codes = np.empty(n, dtype=np.int64)
    hits = np.empty(n)
    for i in prange(n):
        codes[i], hits[i] = certify(V, discs, caps, starts[i], twists[i], earliest, max_depth)
    return codes, hits


@njit(cache=True, parallel=True)
def dense_batch(V, discs, caps, starts, twists, ts):
    n = starts.shape[0]
    out = np.empty(n, dtype=np.bool_)
    for i in prange(n):
        out[i] = dense_free(V, discs, caps, starts[i], twists[i], ts)
    return out


@njit(cache=True, parallel=True)
def expand(V, discs, caps, nodes, frontier, cands, kmax, dense, ts, max_depth):
    """For each candidate, the first frontier node (in order) joined to it by a free simple move."""
    n = cands.shape[0]
    parent = np.full(n, -1, dtype=np.int64)
    twists = np.zeros((n, 3))
    for i in prange(n):
        b = nodes[cands[i]]
        for j in range(frontier.shape[0]):
            ok, tw = edge(V, discs, caps, nodes[frontier[j]], b, kmax, dense, ts, max_depth)
            if ok:
                parent[i] = frontier[j]
                twists[i] = tw
                break
    return parent, twists
