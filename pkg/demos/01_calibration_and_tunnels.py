"""Calibration frames and tunnel trajectories.

Builds the working-plane frame from three demonstrated points, generates
the four built-in exercises, and shows resampling and the confidence
interval settings.
"""

import numpy as np

from tunneltrainer import (ConfidenceInterval, arc_length,
                           frame_from_three_points, generate_exercise,
                           resample_polyline, transform_point)

# A technician taps three points on the table: origin, a point along the
# table edge, and one more to fix the plane.
p1 = np.array([0.42, -0.11, 0.76])
p2 = np.array([0.71, -0.05, 0.76])
p3 = np.array([0.40, 0.28, 0.77])
frame = frame_from_three_points(p1, p2, p3)
print("plane origin:", frame.origin)
print("plane normal:", frame.plane_normal.round(4))

# World points map into plane coordinates and back.
hand_world = np.array([0.55, 0.05, 0.80])
local = transform_point(frame, hand_world, "world_to_local")
back = transform_point(frame, local, "local_to_world")
print("hand in plane coords:", local.round(4), " round-trip error:",
      np.linalg.norm(back - hand_world))

# The four library exercises, expressed in the plane frame.
for tid in ("T1", "T2", "T3", "T4"):
    traj = generate_exercise(tid)
    print(f"{tid}: {len(traj.via_points)} via-points, "
          f"length {arc_length(traj.via_points):.3f} m, "
          f"closed={traj.is_closed}")

# Tunnel diameters: the allowed deviation is the radius.
for ci in ConfidenceInterval:
    print(f"{ci.name}: diameter {ci.diameter*100:.1f} cm, "
          f"allowed deviation {ci.radius*100:.2f} cm")

# Resampling keeps endpoints and spreads via-points evenly along the arc.
zigzag = np.array([[0, 0, 0], [0.1, 0.05, 0], [0.2, -0.05, 0], [0.3, 0, 0]])
resampled = resample_polyline(zigzag, 0.02)
print("zigzag resampled to", len(resampled), "points,",
      "step", np.linalg.norm(np.diff(resampled, axis=0), axis=1).mean().round(4), "m")
