"""Live scoring: drive a session by hand and watch spheres change.

A session walks Calibrating -> Selecting -> Executing; each hand sample is
scored against the nearest via-point and the sphere deflates and turns
green as the error shrinks.
"""

import numpy as np

from tunneltrainer import ConfidenceInterval, Session, generate_exercise
from tunneltrainer.feedback import (Calibrate, FeedbackMode, HandSample,
                                    SelectTrajectory, SetCI, SetMode, Start,
                                    Stop)

session = Session()
for p in ((0, 0, 0), (1, 0, 0), (0, 1, 0)):
    session.apply_command(Calibrate(np.array(p, dtype=float)))

traj = generate_exercise("T1")
session.apply_command(SelectTrajectory(traj))
session.apply_command(SetCI(ConfidenceInterval.C2))
session.apply_command(SetMode(FeedbackMode.OVERWRITE))
session.apply_command(Start())
print("tunnel starts fully red:",
      all(c == (255, 0, 0) for c in session.tunnel.color))

# Sweep along the tunnel with a little lateral error that shrinks over time.
t = 0.0
for k, u in enumerate(np.linspace(0, 1, 60)):
    target = traj.via_points[int(u * (len(traj.via_points) - 1))]
    lateral = 0.02 * (1 - u)          # improving precision
    pos = target + np.array([0, lateral, 0])
    update = session.process_sample(HandSample(t, pos))
    if k % 15 == 0:
        print(f"u={u:.2f} error={update.current_error*100:.2f} cm "
              f"nearest sphere #{update.nearest_index} "
              f"changed={len(update.changed)}")
    t += 16.0

session.apply_command(Stop())
greens = sum(1 for c in session.tunnel.color if c[1] > c[0])
print(f"{greens}/{len(session.tunnel.color)} spheres ended greener than red")
print("tracked path samples:", len(session.tracked_path))
