"""Static multi-panel SVG drawings of a scene and a piecewise move.

Panel 0 shows the object at its start placement; panel j shows simple move j
with its start and end placements and the trace of every vertex.
"""

from __future__ import annotations

import numpy as np

from .geometry import Scene
from .lie import Pose
from .sweep import PiecewiseMove

TRACE_SAMPLES = 64
PANEL = 320.0
PAD = 16.0


def _f(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _points(P) -> str:
    return " ".join(f"{_f(x)},{_f(y)}" for x, y in P)


def _bounds(scene: Scene, placed) -> tuple[np.ndarray, np.ndarray]:
    pts = [P for P in placed]
    for o in scene.cage:
        lo, hi = o.extent()
        pts.append(np.array([lo, hi]))
    allp = np.concatenate(pts)
    lo, hi = allp.min(0), allp.max(0)
    span = max(float((hi - lo).max()), 1e-9)
    pad = 0.05 * span
    return lo - pad, hi + pad


def render_svg(scene: Scene, start: Pose, moves: PiecewiseMove | None = None) -> str:
    V = scene.object.vertices
    sims = moves.simple_moves() if moves is not None else []
    traces = []
    for m in sims:
        ts = np.linspace(0.0, 1.0, TRACE_SAMPLES)
        traces.append(np.stack([m.pose_at(t).apply(V) for t in ts]))  # (T, m, 2)
    placed = [start.apply(V)] + [tr.reshape(-1, 2) for tr in traces]
    lo, hi = _bounds(scene, placed)
    scale = (PANEL - 2 * PAD) / float((hi - lo).max())

    def to_px(P, k):
        P = np.asarray(P, dtype=float)
        x = PAD + k * PANEL + (P[..., 0] - lo[0]) * scale
        y = PANEL - PAD - (P[..., 1] - lo[1]) * scale
        return np.stack([x, y], -1)

    n_panels = 1 + len(sims)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(n_panels * PANEL)}" height="{_f(PANEL)}" '
        f'viewBox="0 0 {_f(n_panels * PANEL)} {_f(PANEL)}">',
    ]
    for k in range(n_panels):
        out.append(f'<g class="panel" id="panel-{k}">')
        out.append(f'<rect x="{_f(k * PANEL)}" y="0" width="{_f(PANEL)}" height="{_f(PANEL)}" '
                   'fill="white" stroke="#999"/>')
        out.append(f'<text x="{_f(k * PANEL + 6)}" y="14" font-size="12">({chr(ord("a") + k % 26)})</text>')
        for o in scene.cage:
            if o.kind == "disc":
                c = to_px(o.a, k)
                out.append(f'<circle class="obstacle" cx="{_f(c[0])}" cy="{_f(c[1])}" '
                           f'r="{_f(max(o.radius * scale, 1.5))}" fill="black"/>')
            else:
                a, b = to_px(o.a, k), to_px(o.b, k)
                out.append(f'<line class="obstacle" x1="{_f(a[0])}" y1="{_f(a[1])}" x2="{_f(b[0])}" '
                           f'y2="{_f(b[1])}" stroke="black" stroke-linecap="round" '
                           f'stroke-width="{_f(max(2 * o.radius * scale, 1.5))}"/>')
        if k == 0:
            out.append(f'<polygon class="object" points="{_points(to_px(start.apply(V), k))}" '
                       'fill="#8ab" fill-opacity="0.6" stroke="#246"/>')
        else:
            tr = traces[k - 1]
            for i in range(tr.shape[1]):
                out.append(f'<polyline class="trace" points="{_points(to_px(tr[:, i], k))}" '
                           'fill="none" stroke="#c84" stroke-width="0.8"/>')
            out.append(f'<polygon class="object start" points="{_points(to_px(tr[0], k))}" '
                       'fill="#8ab" fill-opacity="0.35" stroke="#246" stroke-dasharray="3,2"/>')
            out.append(f'<polygon class="object end" points="{_points(to_px(tr[-1], k))}" '
                       'fill="#8ab" fill-opacity="0.6" stroke="#246"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
