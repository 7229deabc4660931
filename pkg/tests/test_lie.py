import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cage.lie import (
    InvalidGenerator, NoScrewOnBranch, Pose, Twist, compose, exp_twist, hat, identity, inverse,
    log_pose, orbit_point, orbit_point_screw, rotation_exp, screw_decompose, v_factor,
)


def quad_v(theta, t=1.0, steps=10**6):
    """Midpoint rule for int_0^t e^{s omega} ds (planar)."""
    s = (np.arange(steps) + 0.5) * (t / steps)
    c, sn = np.cos(theta * s).sum(), np.sin(theta * s).sum()
    h = t / steps
    return h * np.array([[c, -sn], [sn, c]])


angles = st.floats(-math.pi + 0.1, math.pi - 0.1)
coords = st.floats(-10, 10)


# -- v_factor -----------------------------------------------------------------

def test_v_factor_zero_is_t_identity():
    assert np.array_equal(v_factor(0.0, 0.37), 0.37 * np.eye(2))
    assert np.array_equal(v_factor(np.zeros(3), 0.5), 0.5 * np.eye(3))


def test_v_factor_quarter_turn_against_quadrature():
    oracle = quad_v(math.pi / 2) @ np.array([1.0, 0.0])
    assert np.allclose(oracle, [2 / math.pi, 2 / math.pi], atol=1e-10)
    assert np.allclose(v_factor(math.pi / 2, 1.0) @ [1.0, 0.0], oracle, atol=1e-10)


def test_v_factor_tiny_angle_is_identity():
    assert np.allclose(v_factor(1e-8, 1.0), np.eye(2), atol=1e-7)


@pytest.mark.parametrize("theta", [0.0, 1e-9, 3e-5, 9.99999e-5, 1e-4, 1.00001e-4, 0.3, -2.0, math.pi, 2 * math.pi, 4 * math.pi])
@pytest.mark.parametrize("t", [0.0, 0.25, 1.0])
def test_v_factor_identity(theta, t):
    W = hat(theta)
    assert np.max(np.abs(W @ v_factor(theta, t) - (rotation_exp(theta, t) - np.eye(2)))) <= 1e-12


def test_v_factor_continuous_across_series_switch():
    for sign in (1, -1):
        lo = v_factor(sign * 1e-4 * (1 - 1e-12), 1.0)
        hi = v_factor(sign * 1e-4 * (1 + 1e-12), 1.0)
        assert np.max(np.abs(lo - hi)) < 1e-10


def test_v_factor_spatial_against_quadrature():
    w = np.array([0.3, -0.7, 1.1])
    steps = 20000
    s = (np.arange(steps) + 0.5) / steps
    oracle = sum(rotation_exp(w, si) for si in s) / steps
    assert np.allclose(v_factor(w, 1.0), oracle, atol=1e-8)
    assert np.max(np.abs(hat(w) @ v_factor(w, 0.6) - (rotation_exp(w, 0.6) - np.eye(3)))) <= 1e-12


def test_v_factor_rejects_nonfinite():
    with pytest.raises(InvalidGenerator, match="invalid generator"):
        v_factor(float("nan"), 1.0)
    with pytest.raises(InvalidGenerator):
        Twist([np.inf, 0.0], 0.0)


# -- exp ----------------------------------------------------------------------

def test_exp_pure_translation():
    p = exp_twist(Twist([1.0, 2.0], 0.0), 0.5)
    assert np.array_equal(p.rotation, np.eye(2))
    assert np.allclose(p.translation, [0.5, 1.0])


def test_exp_quarter_turn():
    p = exp_twist(Twist([1.0, 0.0], math.pi / 2), 1.0)
    assert np.allclose(p.rotation, [[0, -1], [1, 0]], atol=1e-15)
    assert np.allclose(p.translation, quad_v(math.pi / 2) @ [1.0, 0.0], atol=1e-10)


def test_exp_at_zero_is_identity():
    g = Twist([3.0, -1.0], 2.5)
    assert exp_twist(g, 0.0).allclose(identity(), atol=0)


@given(coords, coords, st.floats(-12, 12))
def test_exp_then_negative_is_identity(x, y, th):
    g = Twist([x, y], th)
    assert compose(exp_twist(g, 1.0), exp_twist(-g, 1.0)).allclose(identity(), atol=1e-9)


@settings(max_examples=200)
@given(coords, coords, st.floats(-4 * math.pi, 4 * math.pi), st.floats(0, 1), st.floats(0, 1))
def test_one_parameter_subgroup(x, y, th, s, t):
    if s + t > 1:
        s, t = 1 - s, 1 - t
    g = Twist([x, y], th)
    assert compose(exp_twist(g, s), exp_twist(g, t)).allclose(exp_twist(g, s + t), atol=1e-9)


@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_spatial_subgroup_and_so3(v):
    g = Twist(v[:3], v[3:])
    p = exp_twist(g, 0.4)
    assert np.allclose(p.rotation.T @ p.rotation, np.eye(3), atol=1e-9)
    assert compose(exp_twist(g, 0.4), exp_twist(g, 0.35)).allclose(exp_twist(g, 0.75), atol=1e-9)


# -- log ----------------------------------------------------------------------

def test_log_identity():
    g = log_pose(identity(), 0)
    assert np.array_equal(g.xi, [0, 0]) and g.omega == 0.0


def test_log_pure_rotation():
    g = log_pose(Pose.planar(0, 0, math.pi / 2), 0)
    assert g.omega == pytest.approx(math.pi / 2)
    assert np.allclose(g.xi, 0, atol=1e-15)


def test_log_branch_one_roundtrip():
    p = Pose(np.array([[0.0, -1.0], [1.0, 0.0]]), [2 / math.pi, 2 / math.pi])
    g = log_pose(p, 1)
    assert g.omega == pytest.approx(math.pi / 2 + 2 * math.pi)
    assert exp_twist(g, 1.0).allclose(p, atol=1e-9)


def test_log_full_turn_branch_without_screw():
    with pytest.raises(NoScrewOnBranch, match="no screw on this branch"):
        log_pose(Pose.planar(1.0, 0.0, 0.0), 1)
    g = log_pose(identity(), -2)
    assert g.omega == pytest.approx(-4 * math.pi) and exp_twist(g).allclose(identity())


@settings(max_examples=300)
@given(coords, coords, angles)
def test_log_exp_roundtrip(x, y, th):
    g = Twist([x, y], th)
    h = log_pose(exp_twist(g, 1.0), 0)
    assert abs(h.omega - th) <= 1e-9 and np.allclose(h.xi, g.xi, atol=1e-9, rtol=0)


@settings(max_examples=100)
@given(coords, coords, st.floats(-math.pi, math.pi), st.integers(-3, 3))
def test_log_branches_all_reach_pose(x, y, th, k):
    p = Pose.planar(x, y, th)
    try:
        g = log_pose(p, k)
    except NoScrewOnBranch:
        assert p.theta == 0.0 and k != 0
        return
    assert exp_twist(g, 1.0).allclose(p, atol=1e-8 * (1 + abs(x) + abs(y)))


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_log_se3_roundtrip(xi, w):
    if np.linalg.norm(w) > math.pi - 1e-3:
        return
    g = Twist(xi, w)
    h = log_pose(exp_twist(g), 0)
    assert np.allclose(h.omega, g.omega, atol=1e-8) and np.allclose(h.xi, g.xi, atol=1e-8)


def test_log_se3_half_turn():
    w = math.pi * np.array([0.0, 0.6, 0.8])
    p = exp_twist(Twist([1.0, 2.0, 3.0], w))
    assert exp_twist(log_pose(p)).allclose(p, atol=1e-9)
    with pytest.raises(NoScrewOnBranch):
        log_pose(p, 1)


# -- screw decomposition and orbits ------------------------------------------

def test_screw_pure_translation():
    d = screw_decompose(Twist([3.0, 4.0], 0.0))
    assert d.is_pure_translation and np.array_equal(d.kernel_translation, [3, 4])
    assert np.array_equal(d.center_offset, [0, 0])


def test_screw_quarter_turn():
    g = Twist([1.0, 0.0], math.pi / 2)
    d = screw_decompose(g)
    assert np.allclose(d.center_offset, [0.0, -2 / math.pi])
    assert np.array_equal(d.kernel_translation, [0.0, 0.0])
    assert np.allclose(hat(g.omega) @ d.center_offset, g.xi)


def test_screw_spatial_kernel_direction():
    g = Twist([0.0, 0.0, 1.0], [0.0, 0.0, 0.7])
    d = screw_decompose(g)
    assert np.allclose(d.kernel_translation, [0, 0, 1])
    assert abs(d.center_offset @ [0, 0, 1]) < 1e-15


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_screw_invariants_spatial(xi, w):
    g = Twist(xi, w)
    d = screw_decompose(g)
    W = g.omega_matrix
    recon = W @ d.center_offset + d.kernel_translation
    assert np.linalg.norm(recon - g.xi) <= 1e-10 * max(1.0, np.linalg.norm(g.xi))
    assert np.linalg.norm(W @ d.kernel_translation) <= 1e-10 * (1 + np.linalg.norm(d.kernel_translation))


@given(coords, coords, st.floats(-6, 6), st.floats(0, 1))
def test_orbit_matches_screw_form(x, y, th, t):
    g = Twist([x, y], th)
    if abs(th) < 1e-3:
        return  # the centre form loses precision as the centre runs off to infinity
    p = np.array([0.3, -1.2])
    assert np.allclose(orbit_point(g, identity(), p, t), orbit_point_screw(g, p, t), atol=1e-10 * (1 + np.hypot(x, y) / abs(th)))


def test_orbit_rotation_fixed_point():
    g = Twist([1.0, 0.0], math.pi / 2)
    c = screw_decompose(g).center
    for t in (0.0, 0.3, 1.0):
        assert np.allclose(orbit_point(g, identity(), c, t), c, atol=1e-15)


def test_orbit_translation():
    g = Twist([2.0, -1.0], 0.0)
    assert np.allclose(orbit_point(g, identity(), [1.0, 1.0], 0.25), [1.5, 0.75])


def test_orbit_half_turn_stays_on_circle():
    g = Twist([0.5, 1.0], math.pi)
    c = screw_decompose(g).center
    x = np.array([1.0, 0.0])
    r = np.linalg.norm(x - c)
    for t in np.linspace(0, 1, 9):
        y = orbit_point(g, identity(), x, t)
        assert np.linalg.norm(y - c) == pytest.approx(r, abs=1e-12)
        assert np.allclose(y, exp_twist(g, t).apply(x))


# -- group structure ------------------------------------------------------------

def test_group_axioms():
    p = Pose.planar(1.0, -2.0, 0.7)
    assert compose(identity(), p).allclose(p, atol=1e-12)
    assert compose(p, inverse(p)).allclose(identity(), atol=1e-12)
    assert compose(inverse(p), p).allclose(identity(), atol=1e-12)
    q = compose(Pose.planar(0, 0, math.pi / 4), Pose.planar(0, 0, math.pi / 4))
    assert q.allclose(Pose.planar(0, 0, math.pi / 2), atol=1e-12)


def test_pose_rejects_non_rotation():
    with pytest.raises(ValueError):
        Pose(np.array([[1.0, 0.0], [0.0, -1.0]]), [0, 0])


@given(coords, coords, st.floats(-20, 20))
def test_exp_output_is_valid_pose(x, y, th):
    p = exp_twist(Twist([x, y], th), 0.77)
    A = p.rotation
    assert np.max(np.abs(A.T @ A - np.eye(2))) <= 1e-9 and abs(np.linalg.det(A) - 1) <= 1e-9
