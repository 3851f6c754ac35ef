"""The 4-DOF arm stand-in and joint-space error analysis.

Forward kinematics places the hand for given joint angles; the damped
least-squares inverse converts hand paths back into joint logs, which is
how the joint-space columns of the error tables are produced.
"""

import numpy as np

from tunneltrainer import ArmGeometry, forward_kinematics, inverse_kinematics
from tunneltrainer.pipeline import analyze_messages
from tunneltrainer.simulate import run_open_loop, sweep_configs, to_joint_log

g = ArmGeometry()
print("links:", g.upper_arm_length, g.forearm_length,
      "shoulder at", g.shoulder_origin)

q = np.array([0.2, 0.5, 0.1, 1.3])
hand = forward_kinematics(g, q)
print("FK of", q, "->", hand.round(4))

recovered = inverse_kinematics(g, hand, seed=np.array([0.0, 0.4, 0.0, 1.0]))
print("IK residual:",
      np.linalg.norm(forward_kinematics(g, recovered) - hand))

# Convert a short simulated hand log to joint space and aggregate errors.
open_cfg, _ = sweep_configs("T4", seed=0)
messages = run_open_loop(open_cfg)
summary_ee = analyze_messages(messages, space="ee", n_expected=5)
summary_j = analyze_messages(messages, space="joint", n_expected=5)
print(f"\nT4 without feedback: end-effector {summary_ee.err*100:.2f} cm, "
      f"joint space {np.degrees(summary_j.err):.2f} deg")

# The same conversion is available directly for raw paths.
t = np.linspace(0, 1000, 50)
line = np.linspace([0.0, 0.0, 0.0], [0.25, 0.0, 0.0], 50)
joints = to_joint_log(t, line, g)
print("joint ranges over a straight reach (rad):")
for i in range(4):
    print(f"  q{i+1}: {joints[:, i].min():+.2f} .. {joints[:, i].max():+.2f}")
