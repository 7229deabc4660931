"""Twists, poses and one-parameter screw motions in SE(2) and SE(3).

A twist ``g = (xi, omega)`` is the Lie algebra element whose matrix form is
``[[0, 0], [xi, omega]]`` acting on ``(1, x)``.  For ``n = 2`` the rotation
generator is a scalar angle ``theta`` standing for ``[[0, -theta], [theta, 0]]``;
for ``n = 3`` it is an axis-angle 3-vector standing for its cross-product
matrix.

The flow of a twist is ``exp(t g) = (e^{t omega}, v_t(omega) xi)`` with
``v_t(omega) = int_0^t e^{s omega} ds``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SERIES_SWITCH = 1e-4
SERIES_TERMS = 12


class InvalidGenerator(ValueError):
    pass


class NoScrewOnBranch(ValueError):
    pass


def _as_omega(omega):
    w = np.asarray(omega, dtype=float)
    if w.ndim == 0:
        return float(w)
    if w.shape != (3,):
        raise InvalidGenerator("invalid generator: omega must be a scalar or 3-vector")
    return w


def hat(omega) -> np.ndarray:
    """Antisymmetric matrix of a rotation generator (scalar -> 2x2, 3-vector -> 3x3)."""
    w = _as_omega(omega)
    if isinstance(w, float):
        return np.array([[0.0, -w], [w, 0.0]])
    return np.array(
        [[0.0, -w[2], w[1]],
         [w[2], 0.0, -w[0]],
         [-w[1], w[0], 0.0]]
    )


def _angle(w) -> float:
    return abs(w) if isinstance(w, float) else float(np.linalg.norm(w))


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise InvalidGenerator("invalid generator")


@dataclass(frozen=True)
class Twist:
    xi: np.ndarray
    omega: float | np.ndarray

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float).reshape(-1)
        w = _as_omega(self.omega)
        _check_finite(xi, w)
        n = 2 if isinstance(w, float) else 3
        if xi.shape != (n,):
            raise InvalidGenerator(f"invalid generator: xi must have length {n}")
        xi.flags.writeable = False
        if not isinstance(w, float):
            w = w.copy()
            w.flags.writeable = False
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "omega", w)

    @property
    def n(self) -> int:
        return self.xi.shape[0]

    @property
    def omega_matrix(self) -> np.ndarray:
        return hat(self.omega)

    @property
    def angle(self) -> float:
        """Rotation magnitude (signed for n=2)."""
        return self.omega if self.n == 2 else float(np.linalg.norm(self.omega))

    def matrix(self) -> np.ndarray:
        """(n+1)x(n+1) matrix form with the translation generator in the first column."""
        n = self.n
        g = np.zeros((n + 1, n + 1))
        g[1:, 0] = self.xi
        g[1:, 1:] = self.omega_matrix
        return g

    def scaled(self, s: float) -> "Twist":
        return Twist(s * self.xi, s * self.omega)

    def __neg__(self):
        return self.scaled(-1.0)


@dataclass(frozen=True)
class Pose:
    """Element (A, u) of SE(n) acting by ``x -> A x + u``."""

    rotation: np.ndarray
    translation: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        A = np.array(self.rotation, dtype=float)
        u = np.array(self.translation, dtype=float).reshape(-1)
        n = u.shape[0]
        if A.shape != (n, n) or n not in (2, 3):
            raise ValueError("pose needs an n x n rotation and length-n translation, n in {2, 3}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(u))):
            raise ValueError("pose entries must be finite")
        if self.check:
            if np.max(np.abs(A.T @ A - np.eye(n))) > 1e-9 or abs(np.linalg.det(A) - 1.0) > 1e-9:
                raise ValueError("rotation is not in SO(n)")
        A.flags.writeable = False
        u.flags.writeable = False
        object.__setattr__(self, "rotation", A)
        object.__setattr__(self, "translation", u)

    @property
    def n(self) -> int:
        return self.translation.shape[0]

    @classmethod
    def planar(cls, x: float, y: float, theta: float) -> "Pose":
        return cls(rotation_2d(theta), np.array([x, y], dtype=float))

    @property
    def theta(self) -> float:
        """Principal rotation angle in (-pi, pi] (planar poses only)."""
        if self.n != 2:
            raise ValueError("theta is defined for planar poses")
        return principal_angle(math.atan2(self.rotation[1, 0], self.rotation[0, 0]))

    def matrix(self) -> np.ndarray:
        n = self.n
        m = np.zeros((n + 1, n + 1))
        m[0, 0] = 1.0
        m[1:, 0] = self.translation
        m[1:, 1:] = self.rotation
        return m

    def apply(self, x) -> np.ndarray:
        """Act on a point or on an (m, n) array of points."""
        x = np.asarray(x, dtype=float)
        return x @ self.rotation.T + self.translation

    def __matmul__(self, other: "Pose") -> "Pose":
        return compose(self, other)

    def allclose(self, other: "Pose", atol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, rtol=0, atol=atol)
            and np.allclose(self.translation, other.translation, rtol=0, atol=atol)
        )


def principal_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.remainder(theta, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    return a


def rotation_2d(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotation_exp(omega, t: float = 1.0) -> np.ndarray:
    """e^{t omega}: planar rotation for n=2, Rodrigues formula for n=3."""
    w = _as_omega(omega)
    if isinstance(w, float):
        return rotation_2d(t * w)
    th = float(np.linalg.norm(w))
    K = hat(w)
    if t * th < SERIES_SWITCH:
        return _expm_series(t * K)
    a = math.sin(t * th) / th
    b = (1.0 - math.cos(t * th)) / th**2
    return np.eye(3) + a * K + b * (K @ K)


def _expm_series(M: np.ndarray, terms: int = SERIES_TERMS) -> np.ndarray:
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms):
        term = term @ M / k
        out = out + term
    return out


def v_factor(omega, t: float = 1.0) -> np.ndarray:
    """v_t(omega) = int_0^t e^{s omega} ds.

    Closed form when ``|theta| t >= 1e-4``, otherwise the power series
    ``sum_k t^{k+1} omega^k / (k+1)!`` truncated at ``SERIES_TERMS`` terms.
    """
    w = _as_omega(omega)
    t = float(t)
    _check_finite(w, t)
    th = _angle(w)
    K = hat(w)
    n = K.shape[0]
    if th * abs(t) < SERIES_SWITCH:
        out = np.zeros((n, n))
        power = np.eye(n)
        tk = t
        fact = 1.0
        for k in range(SERIES_TERMS):
            out = out + (tk / fact) * power
            power = power @ K
            tk *= t
            fact *= k + 2
        return out
    if n == 2:
        # (e^{t w} - I) w^{-1}, written out entrywise
        s = math.sin(t * w) / w
        c = 2.0 * math.sin(0.5 * t * w) ** 2 / w
        return np.array([[s, -c], [c, s]])
    # omega is singular in 3D: integrate Rodrigues term by term
    a = 2.0 * math.sin(0.5 * t * th) ** 2 / th**2
    b = (t * th - math.sin(t * th)) / th**3
    return t * np.eye(3) + a * K + b * (K @ K)


def exp_twist(g: Twist, t: float = 1.0) -> Pose:
    """exp(t g) as a pose."""
    A = rotation_exp(g.omega, t)
    u = v_factor(g.omega, t) @ g.xi
    return Pose(A, u)


def identity(n: int = 2) -> Pose:
    return Pose(np.eye(n), np.zeros(n))


def compose(p: Pose, q: Pose) -> Pose:
    """p after q: x -> p(q(x))."""
    return Pose(p.rotation @ q.rotation, p.rotation @ q.translation + p.translation, check=False)


def inverse(p: Pose) -> Pose:
    At = p.rotation.T
    return Pose(At, -(At @ p.translation), check=False)


def log_pose(p: Pose, k: int = 0) -> Twist:
    """A twist g with exp(g) = p.

    For planar poses ``k`` picks the branch ``theta = principal + 2 pi k``.
    The spatial logarithm only supports the principal branch.
    """
    if p.n == 2:
        return _log_se2(p, int(k))
    if k != 0:
        raise NoScrewOnBranch("no screw on this branch: SE(3) logarithm is principal-only")
    return _log_se3(p)


def _log_se2(p: Pose, k: int) -> Twist:
    base = p.theta
    theta = base + 2.0 * math.pi * k
    u = p.translation
    if theta == 0.0:
        return Twist(u.copy(), 0.0)
    if base == 0.0:
        # v_1 vanishes at theta in 2 pi Z \ {0}
        if np.any(u != 0.0):
            raise NoScrewOnBranch("no screw on this branch")
        return Twist(np.zeros(2), theta)
    xi = np.linalg.solve(v_factor(theta, 1.0), u)
    return Twist(xi, theta)


def _log_se3(p: Pose) -> Twist:
    A = p.rotation
    skew = np.array([A[2, 1] - A[1, 2], A[0, 2] - A[2, 0], A[1, 0] - A[0, 1]])
    th = math.atan2(0.5 * np.linalg.norm(skew), 0.5 * (np.trace(A) - 1.0))
    if th < 1e-7:
        axis_angle = 0.5 * skew
    elif math.pi - th < 1e-3:
        # near pi: A + I = 2 a a^T; recover the axis from the symmetric part
        S = 0.5 * (A + np.eye(3))
        i = int(np.argmax(np.diag(S)))
        axis = S[:, i] / math.sqrt(max(S[i, i], 1e-300))
        if axis @ skew < 0:
            axis = -axis
        axis_angle = th * axis / np.linalg.norm(axis)
    else:
        axis = skew / (2.0 * math.sin(th))
        axis_angle = th * axis
    xi = np.linalg.solve(v_factor(axis_angle, 1.0), p.translation)
    return Twist(xi, axis_angle)


@dataclass(frozen=True)
class ScrewDecomposition:
    center_offset: np.ndarray
    kernel_translation: np.ndarray
    is_pure_translation: bool

    @property
    def center(self) -> np.ndarray:
        """Fixed point of the rotation part, ``-center_offset``."""
        return -self.center_offset


def screw_decompose(g: Twist) -> ScrewDecomposition:
    """Split ``xi = omega xi0 + xi1`` with ``xi1`` the projection onto ker omega."""
    n = g.n
    if _angle(g.omega) == 0.0:
        return ScrewDecomposition(np.zeros(n), g.xi.copy(), True)
    W = g.omega_matrix
    if n == 2:
        xi0 = np.linalg.solve(W, g.xi)
        return ScrewDecomposition(xi0, np.zeros(2), False)
    axis = g.omega / np.linalg.norm(g.omega)
    xi1 = axis * (axis @ g.xi)
    # least-squares solve on the image of omega; minimum-norm xi0 is orthogonal to the axis
    xi0 = np.linalg.lstsq(W, g.xi - xi1, rcond=None)[0]
    xi0 = xi0 - axis * (axis @ xi0)
    return ScrewDecomposition(xi0, xi1, False)


def orbit_point(g: Twist, start: Pose, x, t: float) -> np.ndarray:
    """Position of object point ``x`` at parameter ``t`` of the move ``exp(t g) o start``."""
    return compose(exp_twist(g, t), start).apply(x)


def orbit_point_screw(g: Twist, x, t: float) -> np.ndarray:
    """Orbit of ``x`` under ``exp(t g)`` via ``e^{t omega}(x + xi0) - xi0 + xi1 t``."""
    d = screw_decompose(g)
    x = np.asarray(x, dtype=float)
    return rotation_exp(g.omega, t) @ (x + d.center_offset) - d.center_offset + t * d.kernel_translation
