"""Caging analysis of a rigid planar object among disc and capsule obstacles."""

from .geometry import Obstacle, ObjectShape, Scene, bounding_radius, clearance, intersects, transform_shape
from .lie import (
    Pose, ScrewDecomposition, Twist, compose, exp_twist, identity, inverse, log_pose,
    orbit_point, screw_decompose, v_factor,
)
from .planner import (
    CagingClassification, EscapeReport, FreeSpace, PoseGrid, brute_force_min_moves, build_free_space,
    classify_caging, connected_components, edge_exists, escape_to_exterior, min_simple_moves, placement,
)
from .scenefile import load_bundled, parse_scene
from .sweep import (
    PiecewiseMove, SimpleMove, SweepVerdict, certify_piecewise, certify_simple_move, velocity_bound,
)

__version__ = "0.1.0"
