"""4-DOF serial arm: forward kinematics and damped-least-squares IK.

Joint layout (a documented stand-in; the chain is what matters, not any
specific device geometry): three intersecting revolute axes at the shoulder
(rotations about world x, then carried y, then carried z) followed by one
elbow flexion axis. With all joints at zero the arm hangs straight down, so
the end effector sits at shoulder_origin - (0, 0, L1 + L2).

The chain is redundant for 3-D positioning: with the elbow extended the
third shoulder rotation spins the arm about its own axis and leaves the
end effector fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import math

import numpy as np

from .errors import JointLimit, NoConvergence, Unreachable
from .geometry import Vec3, as_vec3, vec3

JointVector = np.ndarray  # shape (4,): q1..q4 radians

DEFAULT_LOWER = (-math.pi / 2, -math.pi / 2, -math.pi / 2, 0.0)
DEFAULT_UPPER = (math.pi / 2, math.pi / 2, math.pi / 2, 2.6)


@dataclass(frozen=True)
class ArmGeometry:
    """Stand-in arm. The default shoulder placement keeps every built-in
    exercise comfortably inside the joint-limited workspace: the elbow
    limit (2.6 rad) means the hand cannot come closer than ~0.155 m to the
    shoulder, so the default placement (behind and beside the workspace,
    like a right shoulder reaching left) keeps every built-in exercise in
    a band ~0.22..0.48 m from it."""

    upper_arm_length: float = 0.30
    forearm_length: float = 0.25
    shoulder_origin: Vec3 = field(default_factory=lambda: vec3(-0.075, -0.15, 0.15))
    lower_limits: tuple[float, float, float, float] = DEFAULT_LOWER
    upper_limits: tuple[float, float, float, float] = DEFAULT_UPPER

    def __post_init__(self):
        if self.upper_arm_length <= 0 or self.forearm_length <= 0:
            raise ValueError("arm segment lengths must be positive")
        object.__setattr__(self, "shoulder_origin", as_vec3(self.shoulder_origin))

    @property
    def reach_max(self) -> float:
        return self.upper_arm_length + self.forearm_length

    @property
    def reach_min(self) -> float:
        return abs(self.upper_arm_length - self.forearm_length)


def as_joints(q) -> JointVector:
    v = np.asarray(q, dtype=np.float64)
    if v.shape != (4,):
        raise ValueError(f"expected 4 joint angles, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite joint angles")
    return v


def check_limits(g: ArmGeometry, q: JointVector):
    lo = np.asarray(g.lower_limits)
    hi = np.asarray(g.upper_limits)
    if np.any(q < lo - 1e-12) or np.any(q > hi + 1e-12):
        raise JointLimit(f"joints {q} outside limits [{lo}, {hi}]")


def _rx(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def _ry(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


def _rz(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


def _chain(g: ArmGeometry, q: JointVector):
    """Shoulder rotation, elbow point and end-effector point."""
    r_sh = _rx(q[0]) @ _ry(q[1]) @ _rz(q[2])
    elbow = g.shoulder_origin + r_sh @ np.array([0.0, 0.0, -g.upper_arm_length])
    ee = elbow + r_sh @ _rx(q[3]) @ np.array([0.0, 0.0, -g.forearm_length])
    return r_sh, elbow, ee


def forward_kinematics(g: ArmGeometry, q, enforce_limits: bool = True) -> Vec3:
    """End-effector (hand centroid) position for joint angles *q*."""
    q = as_joints(q)
    if enforce_limits:
        check_limits(g, q)
    return _chain(g, q)[2]


def joint_points(g: ArmGeometry, q) -> tuple[Vec3, Vec3, Vec3]:
    """(shoulder, elbow, end-effector) positions, for plotting/inspection."""
    q = as_joints(q)
    _, elbow, ee = _chain(g, q)
    return g.shoulder_origin.copy(), elbow, ee


def jacobian(g: ArmGeometry, q: JointVector) -> np.ndarray:
    """3x4 positional Jacobian (column i = axis_i x (ee - pivot_i))."""
    q = as_joints(q)
    r1 = _rx(q[0])
    r12 = r1 @ _ry(q[1])
    r_sh = r12 @ _rz(q[2])
    elbow = g.shoulder_origin + r_sh @ np.array([0.0, 0.0, -g.upper_arm_length])
    ee = elbow + r_sh @ _rx(q[3]) @ np.array([0.0, 0.0, -g.forearm_length])

    a1 = np.array([1.0, 0.0, 0.0])
    a2 = r1[:, 1]
    a3 = r12[:, 2]
    a4 = r_sh[:, 0]
    s = g.shoulder_origin
    J = np.empty((3, 4))
    J[:, 0] = np.cross(a1, ee - s)
    J[:, 1] = np.cross(a2, ee - s)
    J[:, 2] = np.cross(a3, ee - s)
    J[:, 3] = np.cross(a4, ee - elbow)
    return J


#: Deterministic restart poses for solves that stall against joint limits.
_RESTART_POSES = (
    (0.8, 0.8, 0.0, 1.3),
    (-0.8, 0.8, 0.0, 1.3),
    (0.8, -0.8, 0.0, 1.3),
    (-0.8, -0.8, 0.0, 1.3),
    (0.0, 0.0, 0.0, 2.2),
)


def _analytic_seeds(g: ArmGeometry, target: Vec3) -> list[np.ndarray]:
    """Closed-form candidates: elbow angle from the law of cosines, a small
    fan of q3 values, and per q3 the two shoulder-angle branches that aim
    the arm at the target. The redundancy means many exact solutions exist;
    the solver keeps the ones inside (or closest to) the joint limits."""
    t = target - g.shoulder_origin
    l1, l2 = g.upper_arm_length, g.forearm_length
    d2 = float(t @ t)
    cos_q4 = (d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    q4 = math.acos(min(1.0, max(-1.0, cos_q4)))
    r = math.hypot(t[1], t[2])
    seeds = []
    fan = np.concatenate([[0.0], np.linspace(-1.55, 1.55, 63)])
    for q3 in fan:
        # arm vector in the shoulder frame for this q3
        wx = -math.sin(q3) * l2 * math.sin(q4)
        wy = math.cos(q3) * l2 * math.sin(q4)
        wz = -l1 - l2 * math.cos(q4)
        r2sq = wx * wx + wz * wz
        if r < abs(wy) or r == 0 or r2sq == 0:
            continue
        phi = math.atan2(t[2], t[1])
        alpha = math.acos(min(1.0, max(-1.0, wy / r)))
        for q1 in (phi + alpha, phi - alpha):
            q1 = math.atan2(math.sin(q1), math.cos(q1))  # wrap
            c, s = math.cos(q1), math.sin(q1)
            tx = t[0]
            tz = -s * t[1] + c * t[2]
            c2 = (tx * wx + tz * wz) / r2sq
            s2 = (tx * wz - tz * wx) / r2sq
            seeds.append(np.array([q1, math.atan2(s2, c2), q3, q4]))
    return seeds


def inverse_kinematics(g: ArmGeometry, target, seed, *, tol: float = 1e-4,
                       max_iter: int = 200, damping: float = 0.05,
                       step_cap: float = 0.2) -> JointVector:
    """Damped-least-squares IK toward *target*, warm-started from *seed*.

    Iterates q += J^T (J J^T + damping^2 I)^-1 e with the per-iteration step
    capped at *step_cap* rad per joint and every iterate clipped into the
    joint limits. A solve that stalls against the limits restarts from a
    fixed list of spread poses, all within the same total iteration budget.
    Raises Unreachable for targets outside the reach annulus and
    NoConvergence if the residual stays above *tol* after *max_iter* total
    iterations.
    """
    target = as_vec3(target)
    seed = as_joints(seed)
    d = float(np.linalg.norm(target - g.shoulder_origin))
    if d > g.reach_max or d < g.reach_min:
        raise Unreachable(
            f"target at {d:.4f} m from shoulder, reach annulus "
            f"[{g.reach_min:.4f}, {g.reach_max:.4f}] m")

    lo = np.asarray(g.lower_limits)
    hi = np.asarray(g.upper_limits)
    lam2 = damping * damping
    eye3 = np.eye(3)
    state = {"budget": max_iter, "best": math.inf}

    def residual(q) -> float:
        return float(np.linalg.norm(target - _chain(g, q)[2]))

    def descend(q) -> np.ndarray | None:
        """Damped-least-squares from q, sharing the iteration budget."""
        err = target - _chain(g, q)[2]
        if np.linalg.norm(err) < tol:
            return q
        while state["budget"] > 0:
            state["budget"] -= 1
            J = jacobian(g, q)
            u = np.linalg.solve(J @ J.T + lam2 * eye3, err)
            dq = J.T @ u
            biggest = np.max(np.abs(dq))
            if biggest > step_cap:
                dq *= step_cap / biggest
            q_next = np.clip(q + dq, lo, hi)
            moved = np.max(np.abs(q_next - q))
            q = q_next
            err = target - _chain(g, q)[2]
            norm = float(np.linalg.norm(err))
            if norm < tol:
                return q
            if moved < 1e-10:   # pinned against the limits
                break
        state["best"] = min(state["best"], float(np.linalg.norm(err)))
        return None

    # Warm path: the caller's seed nearly always converges in a step or two.
    q = descend(np.clip(seed, lo, hi))
    if q is not None:
        return q

    # Hard solve: exact closed-form candidates, nearest-to-limits first.
    candidates = _analytic_seeds(g, target)
    scored = []
    for cand in candidates:
        clipped = np.clip(cand, lo, hi)
        in_limits = bool(np.all(np.abs(clipped - cand) < 1e-12))
        res = residual(clipped)
        if in_limits and res < tol:
            return clipped
        scored.append((not in_limits, res, clipped))
    scored.sort(key=lambda item: (item[0], item[1]))
    for _, _, cand in scored:
        if state["budget"] <= 0:
            break
        q = descend(cand)
        if q is not None:
            return q
    for pose in _RESTART_POSES:
        if state["budget"] <= 0:
            break
        q = descend(np.clip(np.asarray(pose), lo, hi))
        if q is not None:
            return q
    raise NoConvergence(
        f"IK residual {state['best']:.3e} m above {tol} after {max_iter} iterations")
