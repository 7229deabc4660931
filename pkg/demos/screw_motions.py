"""A tour of planar screw motions.

Every rigid displacement of the plane is reached by one constant-velocity
motion exp(t g), and each rotation angle branch gives a different one.
"""

import math

import numpy as np

from cage import Pose, Twist, exp_twist, log_pose, screw_decompose, v_factor

# A quarter turn combined with a unit push along x.
g = Twist([1.0, 0.0], math.pi / 2)
end = exp_twist(g)
print("end rotation angle", round(end.theta, 6), "translation", np.round(end.translation, 6))

# The motion is a pure rotation about a fixed center.
d = screw_decompose(g)
print("fixed center", np.round(d.center, 6) + 0.0, "(2/pi =", round(2 / math.pi, 6), ")")
for t in (0.25, 0.5, 1.0):
    print(f"  t={t}: center maps to", np.round(exp_twist(g, t).apply(d.center), 12))

# The v factor near zero rotation switches to a power series; both sides agree.
for th in (0.99e-4, 1.01e-4):
    print(f"v({th:g}) =", np.array2string(v_factor(th), precision=12))

# Three branches reaching the same pose: the rotation differs by full turns.
target = Pose.planar(2.0, 1.0, 0.4)
for k in (0, 1, -1):
    h = log_pose(target, k)
    ok = exp_twist(h).allclose(target)
    print(f"branch {k:+d}: theta={h.omega:+.4f} xi={np.round(h.xi, 4)} reaches target: {ok}")
