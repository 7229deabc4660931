"""Classify every bundled scene at a coarse grid.

A scene whose free placements split into several classes is a complete
caging set.  Otherwise it may still hold the object in a practical sense,
when some pair of placements needs at least ell0 simple moves.
"""

import time

from cage import build_free_space, classify_caging, connected_components
from cage.scenefile import bundled_scenes, load_bundled

ELL0 = 2

for name in bundled_scenes():
    sf = load_bundled(name)
    grid = sf.pose_grid((16, 16, 24))
    t0 = time.perf_counter()
    fs = build_free_space(sf.scene, grid)
    comps = connected_components(fs, sf.scene)
    cl = classify_caging(sf.scene, grid, ELL0, [sf.pose(k) for k in sf.poses], fs)
    print(f"{name:16s} components {comps.count} {comps.census()[:4]} -> {cl.verdict} "
          f"({time.perf_counter() - t0:.1f}s)")
