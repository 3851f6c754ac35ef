"""Coordinate frames, trajectory construction and the built-in exercise set.

All lengths are meters and all angles radians, everywhere in the package.
Points are float64 numpy arrays of shape (3,); polylines and via-point lists
are arrays of shape (N, 3).

Frame convention for the calibrated working plane: the first demonstrated
point is the origin, the direction to the second point is the local x axis,
and the plane normal (x cross the in-plane component of the third point) is
the local z axis. Motion "in the plane" therefore means constant local z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CoincidentPoints, CollinearPoints, DegeneratePath

Vec3 = np.ndarray  # shape (3,), float64

#: Default distance between consecutive via-points. Below the tightest
#: allowed deviation (1.5 cm) so the tunnel reads as continuous.
DEFAULT_SPACING = 0.01

_AREA_EPS = 1e-9       # m^2, degenerate-triangle threshold
_PAIR_EPS = 1e-6       # m, coincident-point threshold


def vec3(x: float, y: float, z: float) -> Vec3:
    return np.array([x, y, z], dtype=np.float64)


def as_vec3(value) -> Vec3:
    """Coerce *value* to a finite (3,) float64 array."""
    v = np.asarray(value, dtype=np.float64)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector {v}")
    return v


def as_points(points) -> np.ndarray:
    """Coerce *points* to a finite (N, 3) float64 array."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected an (N, 3) point array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point array contains non-finite values")
    return pts


@dataclass(frozen=True)
class Frame:
    """A calibrated local coordinate system.

    ``axes`` holds the local basis as rows (x, y, z expressed in world
    coordinates), so world -> local is ``axes @ (p - origin)``.
    """

    origin: Vec3
    axes: np.ndarray  # (3, 3), rows = local x/y/z in world coordinates

    def __post_init__(self):
        axes = np.asarray(self.axes, dtype=np.float64)
        if axes.shape != (3, 3):
            raise ValueError("axes must be a 3x3 matrix")
        if not np.allclose(axes @ axes.T, np.eye(3), atol=1e-9):
            raise ValueError("axes must be orthonormal")
        if np.linalg.det(axes) < 0:
            raise ValueError("axes must be right-handed (determinant +1)")
        object.__setattr__(self, "origin", as_vec3(self.origin))
        object.__setattr__(self, "axes", axes)

    @property
    def plane_normal(self) -> Vec3:
        return self.axes[2]

    def world_to_local(self, p: Vec3) -> Vec3:
        return self.axes @ (as_vec3(p) - self.origin)

    def local_to_world(self, p: Vec3) -> Vec3:
        return self.axes.T @ as_vec3(p) + self.origin

    @staticmethod
    def identity() -> "Frame":
        return Frame(origin=np.zeros(3), axes=np.eye(3))


def frame_from_three_points(p1, p2, p3) -> Frame:
    """Build the working-plane frame from three demonstrated points.

    p1 is the origin, p1 -> p2 the local x axis, and the normal of the
    plane through the three points the local z axis (y completes the
    right-handed triad). Raises CoincidentPoints / CollinearPoints for
    degenerate inputs.
    """
    p1, p2, p3 = as_vec3(p1), as_vec3(p2), as_vec3(p3)
    for a, b, pair in ((p1, p2, "p1/p2"), (p1, p3, "p1/p3"), (p2, p3, "p2/p3")):
        if np.linalg.norm(b - a) < _PAIR_EPS:
            raise CoincidentPoints(f"points {pair} are closer than {_PAIR_EPS} m")
    u = p2 - p1
    v = p3 - p1
    n = np.cross(u, v)
    area = 0.5 * np.linalg.norm(n)
    if area < _AREA_EPS:
        raise CollinearPoints(f"triangle area {area:.3e} m^2 below {_AREA_EPS}")
    x_axis = u / np.linalg.norm(u)
    z_axis = n / np.linalg.norm(n)
    y_axis = np.cross(z_axis, x_axis)
    return Frame(origin=p1, axes=np.vstack([x_axis, y_axis, z_axis]))


def transform_point(frame: Frame, p, direction: str) -> Vec3:
    """Rigidly transform *p* between world and the frame's local system.

    *direction* is ``"world_to_local"`` or ``"local_to_world"``.
    """
    if direction == "world_to_local":
        return frame.world_to_local(p)
    if direction == "local_to_world":
        return frame.local_to_world(p)
    raise ValueError(f"unknown direction {direction!r}")


def arc_length(points) -> float:
    """Total length of the polyline through *points* (sum of segment norms)."""
    pts = as_points(points)
    if len(pts) < 2:
        raise ValueError("arc_length needs at least 2 points")
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def resample_polyline(points, spacing: float) -> np.ndarray:
    """Resample a polyline to arc-length-uniform points.

    The first and last input points are preserved and every output point
    lies on the input polyline. The achieved step is ``L / round(L/spacing)``
    so the samples divide the total length evenly.
    """
    pts = as_points(points)
    if len(pts) < 2:
        raise ValueError("resample_polyline needs at least 2 points")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total < spacing:
        raise DegeneratePath(f"arc length {total:.4g} m below spacing {spacing:.4g} m")
    n = max(1, int(round(total / spacing)))
    targets = np.linspace(0.0, total, n + 1)
    out = np.empty((n + 1, 3))
    for k in range(3):
        out[:, k] = np.interp(targets, cum, pts[:, k])
    out[0] = pts[0]
    out[-1] = pts[-1]
    return out


class ConfidenceInterval(Enum):
    """Tunnel diameter setting: how precise the user is required to be.

    The allowed deviation from the desired path is the radius (diameter/2);
    beyond it the feedback saturates fully red.
    """

    C1 = 0.10
    C2 = 0.065
    C3 = 0.03

    @property
    def diameter(self) -> float:
        return self.value

    @property
    def radius(self) -> float:
        return self.value / 2.0

    @staticmethod
    def parse(name: str) -> "ConfidenceInterval":
        try:
            return ConfidenceInterval[name.upper()]
        except KeyError:
            raise ValueError(f"unknown confidence interval {name!r}") from None


@dataclass
class Trajectory:
    """An ordered list of via-points in the calibrated local frame.

    ``spacing`` is the declared distance between consecutive via-points;
    construction enforces that the actual steps stay within +-10% of it.
    """

    id: str
    via_points: np.ndarray  # (N, 3), local frame
    spacing: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.via_points = as_points(self.via_points)
        if len(self.via_points) < 2:
            raise ValueError("a trajectory needs at least 2 via-points")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        seg = np.linalg.norm(np.diff(self.via_points, axis=0), axis=1)
        tol = 0.1 * self.spacing + 1e-9
        if np.any(np.abs(seg - self.spacing) > tol):
            worst = float(np.max(np.abs(seg - self.spacing)))
            raise ValueError(
                f"via-point spacing deviates {worst:.4g} m from declared "
                f"{self.spacing:.4g} m (more than 10%)"
            )

    @property
    def start_point(self) -> Vec3:
        return self.via_points[0]

    @property
    def is_closed(self) -> bool:
        """Whether the path returns to its start (loop exercises)."""
        return bool(np.linalg.norm(self.via_points[-1] - self.via_points[0]) <= self.spacing)

    def translated(self, dx: float, dy: float) -> "Trajectory":
        """Copy of the trajectory shifted within the working plane.

        Vertical (local z) placement is locked to the plane level, so only
        in-plane offsets are applied.
        """
        moved = self.via_points + np.array([dx, dy, 0.0])
        return Trajectory(id=self.id, via_points=moved, spacing=self.spacing,
                          metadata=dict(self.metadata))


EXERCISE_IDS = ("T1", "T2", "T3", "T4")


def generate_exercise(exercise_id: str, *, reach: float = 0.30,
                      table_height: float = 0.0, shoulder_height: float = 0.30,
                      circle_radius: float = 0.15,
                      spacing: float = DEFAULT_SPACING) -> Trajectory:
    """Build one of the four library exercises, in the local frame.

    T1: table-level reach to the left (+x), constant height.
    T2: shoulder-level reach to the left.
    T3: shoulder-level reach to the front (+y).
    T4: closed clockwise circle at table level, starting and ending at the
        start point (clockwise as seen from above, against the plane normal).
    """
    if exercise_id not in EXERCISE_IDS:
        raise ValueError(f"unknown exercise {exercise_id!r}")
    for name, val in (("reach", reach), ("table_height", table_height),
                      ("shoulder_height", shoulder_height),
                      ("circle_radius", circle_radius), ("spacing", spacing)):
        if val < 0 or (name in ("reach", "circle_radius", "spacing") and val <= 0):
            raise ValueError(f"{name} must be positive, got {val}")

    if exercise_id == "T1":
        skeleton = [vec3(0, 0, table_height), vec3(reach, 0, table_height)]
    elif exercise_id == "T2":
        skeleton = [vec3(0, 0, shoulder_height), vec3(reach, 0, shoulder_height)]
    elif exercise_id == "T3":
        skeleton = [vec3(0, 0, shoulder_height), vec3(0, reach, shoulder_height)]
    else:  # T4
        center = vec3(0.0, circle_radius, table_height)
        m = max(16, int(math.ceil(2 * math.pi * circle_radius / (spacing / 4.0))))
        theta = -math.pi / 2 - np.linspace(0.0, 2 * math.pi, m + 1)
        ring = np.stack([np.cos(theta) * circle_radius,
                         np.sin(theta) * circle_radius,
                         np.zeros(m + 1)], axis=1)
        skeleton = center + ring
        skeleton[-1] = skeleton[0]

    pts = resample_polyline(np.asarray(skeleton, dtype=np.float64), spacing)
    achieved = arc_length(pts) / (len(pts) - 1)
    return Trajectory(id=exercise_id, via_points=pts, spacing=achieved,
                      metadata={"exercise": exercise_id})
