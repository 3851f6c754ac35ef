"""Service configuration: one TOML document, flat sections.

Everything tunable from outside lives here: the feedback mapping constants,
the arm geometry used for joint-space analytics, server persistence paths
and rate limit, and the simulator's behavioral constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - environment dependent
    import tomli as tomllib

from .arm import ArmGeometry
from .feedback import FeedbackParams


@dataclass(frozen=True)
class ServerOptions:
    log_dir: str = "session_logs"
    trajectory_dir: str | None = None
    max_sample_rate_hz: float = 1000.0


@dataclass(frozen=True)
class SimulatorOptions:
    deadband_fraction: float = 0.2   # of the tunnel radius
    anchor_time_s: float = 0.5       # offset ramp near stroke endpoints
    dwell_time_s: float = 0.8        # pause at the start point between reps


@dataclass(frozen=True)
class EngineConfig:
    feedback: FeedbackParams = field(default_factory=FeedbackParams)
    arm: ArmGeometry = field(default_factory=ArmGeometry)
    server: ServerOptions = field(default_factory=ServerOptions)
    simulator: SimulatorOptions = field(default_factory=SimulatorOptions)


def default_config() -> EngineConfig:
    return EngineConfig()


def _triple(value, name):
    if not isinstance(value, list) or len(value) != 3:
        raise ValueError(f"config key {name} must be a 3-element list")
    return tuple(float(v) for v in value)


def load_config(path) -> EngineConfig:
    """Load an EngineConfig from a TOML file; missing keys keep defaults."""
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)

    fb = doc.get("feedback", {})
    feedback = FeedbackParams(
        scale_min=float(fb.get("scale_min", 0.3)),
        color_zero=tuple(int(v) for v in fb.get("color_zero", (0, 100, 0))),
        color_full=tuple(int(v) for v in fb.get("color_full", (255, 0, 0))),
        start_radius=float(fb.get("start_radius_m", 0.03)),
    )

    arm_doc = doc.get("arm", {})
    defaults = ArmGeometry()
    arm = ArmGeometry(
        upper_arm_length=float(arm_doc.get("upper_arm_length_m",
                                           defaults.upper_arm_length)),
        forearm_length=float(arm_doc.get("forearm_length_m",
                                         defaults.forearm_length)),
        shoulder_origin=_triple(arm_doc["shoulder_origin_m"], "arm.shoulder_origin_m")
        if "shoulder_origin_m" in arm_doc else defaults.shoulder_origin,
        lower_limits=_triple4(arm_doc.get("lower_limits_rad"), defaults.lower_limits),
        upper_limits=_triple4(arm_doc.get("upper_limits_rad"), defaults.upper_limits),
    )

    srv = doc.get("server", {})
    server = ServerOptions(
        log_dir=str(srv.get("log_dir", "session_logs")),
        trajectory_dir=str(srv["trajectory_dir"]) if "trajectory_dir" in srv else None,
        max_sample_rate_hz=float(srv.get("max_sample_rate_hz", 1000.0)),
    )

    sim = doc.get("simulator", {})
    simulator = SimulatorOptions(
        deadband_fraction=float(sim.get("deadband_fraction", 0.2)),
        anchor_time_s=float(sim.get("anchor_time_s", 0.5)),
        dwell_time_s=float(sim.get("dwell_time_s", 0.8)),
    )
    return EngineConfig(feedback=feedback, arm=arm, server=server,
                        simulator=simulator)


def _triple4(value, default):
    if value is None:
        return default
    if not isinstance(value, list) or len(value) != 4:
        raise ValueError("joint limit lists need 4 entries")
    return tuple(float(v) for v in value)


def write_default_config(path) -> None:
    """Write a commented template with the default values."""
    text = """\
# tunneltrainer service configuration (all lengths meters, angles radians)

[feedback]
scale_min = 0.3
color_zero = [0, 100, 0]     # dark green at zero error
color_full = [255, 0, 0]     # red at/beyond the tunnel radius
start_radius_m = 0.03        # repetition-boundary sphere around the start

[arm]
upper_arm_length_m = 0.30
forearm_length_m = 0.25
shoulder_origin_m = [-0.075, -0.15, 0.15]
lower_limits_rad = [-1.5707963267948966, -1.5707963267948966, -1.5707963267948966, 0.0]
upper_limits_rad = [1.5707963267948966, 1.5707963267948966, 1.5707963267948966, 2.6]

[server]
log_dir = "session_logs"
# trajectory_dir = "trajectories"   # optional library of trajectory JSON files
max_sample_rate_hz = 1000.0

[simulator]
deadband_fraction = 0.2
anchor_time_s = 0.5
dwell_time_s = 0.8
"""
    Path(path).write_text(text, encoding="utf-8")
