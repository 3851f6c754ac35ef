"""Line-delimited JSON wire protocol and the replayable session driver.

One JSON object per line, field ``type`` in {hand_sample, command, feedback,
summary, error}. Inbound traffic consists of hand samples and commands;
the engine answers with feedback frames (per accepted sample, plus a full
tunnel snapshot after start/reset_tunnel), error frames (the session stays
alive), and one summary frame on stop.

Spatial payloads (calibration points, hand samples) are expressed in the
client's tracking space; the engine maps them through the calibrated frame.
A client that works directly in plane coordinates simply calibrates with
the canonical points (0,0,0), (1,0,0), (0,1,0), which makes the two spaces
identical.

Hand samples may carry an optional ``desired_m`` field: the reference
position the mover was supposed to be at (simulators and robot reference
generators know it). Offline analytics prefers that recorded signal and
falls back to an analytic constant-speed reconstruction when it is absent.

The driver is deterministic: replaying the inbound half of a session log
through a fresh driver reproduces the outbound half byte for byte.
"""

from __future__ import annotations

import json
from typing import Callable

import numpy as np

from . import analytics
from .errors import SchemaViolation, TunnelTrainerError
from .feedback import (Calibrate, DEFAULT_PARAMS, FeedbackMode, FeedbackParams,
                       FeedbackUpdate, PlaceMove, ResetTunnel, Session, SetCI,
                       SetMode, SphereState, Start, Stop, SelectTrajectory)
from .geometry import ConfidenceInterval, Trajectory, generate_exercise, EXERCISE_IDS
from .storage import trajectory_from_dict, trajectory_to_dict

MESSAGE_TYPES = ("hand_sample", "command", "feedback", "summary", "error")

COMMAND_ACTIONS = ("calibrate", "select", "place_move", "set_ci", "set_mode",
                   "start", "stop", "reset_tunnel")


def encode(msg: dict) -> str:
    """Serialize one wire message (compact, key order preserved)."""
    return json.dumps(msg, separators=(",", ":"))


def _vector(value, name: str, length: int = 3) -> list[float]:
    if (not isinstance(value, (list, tuple)) or len(value) != length
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                       for v in value)):
        raise SchemaViolation(f"field {name!r} must be a list of {length} numbers")
    return [float(v) for v in value]


def parse_line(line: str) -> dict:
    """Parse and structurally validate one inbound line."""
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as e:
        raise SchemaViolation(f"malformed JSON: {e}") from None
    if not isinstance(msg, dict):
        raise SchemaViolation("message must be a JSON object")
    mtype = msg.get("type")
    if mtype not in MESSAGE_TYPES:
        raise SchemaViolation(f"unknown message type {mtype!r}")
    if mtype == "hand_sample":
        if not isinstance(msg.get("t_ms"), (int, float)):
            raise SchemaViolation("hand_sample needs a numeric 't_ms'")
        _vector(msg.get("pos_m"), "pos_m")
        if "desired_m" in msg:
            _vector(msg["desired_m"], "desired_m")
    elif mtype == "command":
        action = msg.get("action")
        if action not in COMMAND_ACTIONS:
            raise SchemaViolation(f"unknown command action {action!r}")
        args = msg.get("args", {})
        if not isinstance(args, dict):
            raise SchemaViolation("command 'args' must be an object")
    return msg


# -- outbound frames ----------------------------------------------------------

def _sphere_dict(s: SphereState) -> dict:
    return {"index": s.index, "scale": s.scale, "color": list(s.color)}


def feedback_frame(update: FeedbackUpdate) -> dict:
    return {
        "type": "feedback",
        "spheres": [_sphere_dict(s) for s in update.changed],
        "current_error_m": float(update.current_error),
        "nearest_index": int(update.nearest_index),
        "path_point_m": [float(v) for v in update.path_point],
    }


def tunnel_snapshot_frame(session: Session) -> dict:
    """Full tunnel state (used right after start / reset_tunnel)."""
    return {
        "type": "feedback",
        "spheres": [_sphere_dict(s) for s in session.tunnel.all_spheres()],
        "current_error_m": None,
        "nearest_index": None,
        "path_point_m": None,
    }


def error_frame(exc: Exception) -> dict:
    return {"type": "error", "code": type(exc).__name__, "message": str(exc)}


def summary_frame(session: Session, error_summary) -> dict:
    frame = {
        "type": "summary",
        "trajectory_id": session.trajectory.id if session.trajectory else None,
        "ci": session.ci.name,
        "mode": session.mode.value,
        "repetition_count": session.repetition_count,
        "error": error_summary.to_dict() if error_summary is not None else None,
        "tracked_path": [[s.t_ms, float(s.pos[0]), float(s.pos[1]), float(s.pos[2])]
                         for s in session.tracked_path],
        "spheres": ([_sphere_dict(s) for s in session.tunnel.all_spheres()]
                    if session.tunnel is not None else []),
    }
    return frame


# -- driver --------------------------------------------------------------------

def builtin_resolver(traj_id: str) -> Trajectory:
    """Default trajectory library: the four built-in exercises."""
    if traj_id in EXERCISE_IDS:
        return generate_exercise(traj_id)
    raise SchemaViolation(f"unknown trajectory id {traj_id!r}")


class SessionDriver:
    """Bridges wire messages to one engine session, deterministically.

    Keeps the per-sample desired reference (when provided) aligned with the
    session's tracked path so the stop summary and offline analytics can
    use it.
    """

    def __init__(self, params: FeedbackParams = DEFAULT_PARAMS,
                 resolver: Callable[[str], Trajectory] = builtin_resolver,
                 samples_per_rep: int = analytics.DEFAULT_SAMPLES_PER_REP):
        self.session = Session(params)
        self.resolver = resolver
        self.samples_per_rep = samples_per_rep
        self.desired_track: list[np.ndarray | None] = []

    def handle_line(self, line: str) -> list[str]:
        return [encode(m) for m in self.handle_parsed(line)]

    def handle_parsed(self, line: str) -> list[dict]:
        try:
            msg = parse_line(line)
        except SchemaViolation as e:
            return [error_frame(e)]
        return self.handle(msg)

    def handle(self, msg: dict) -> list[dict]:
        try:
            if msg["type"] == "hand_sample":
                return self._handle_sample(msg)
            if msg["type"] == "command":
                return self._handle_command(msg)
            raise SchemaViolation(
                f"clients may not send {msg['type']!r} frames")
        except (TunnelTrainerError, ValueError) as e:
            return [error_frame(e)]

    def _handle_sample(self, msg: dict) -> list[dict]:
        sample = self.session.sample_from_world(float(msg["t_ms"]), msg["pos_m"])
        update = self.session.process_sample(sample)
        if "desired_m" in msg:
            local = self.session.frame.world_to_local(msg["desired_m"])
            self.desired_track.append(local)
        else:
            self.desired_track.append(None)
        return [feedback_frame(update)]

    def _handle_command(self, msg: dict) -> list[dict]:
        action = msg["action"]
        args = msg.get("args", {})
        session = self.session
        if action == "calibrate":
            session.apply_command(Calibrate(_vector(args.get("pos_m"), "pos_m")))
            return []
        if action == "select":
            if "trajectory" in args:
                traj = trajectory_from_dict(args["trajectory"])
            elif "id" in args:
                traj = self.resolver(str(args["id"]))
            else:
                raise SchemaViolation("select needs 'trajectory' or 'id'")
            session.apply_command(SelectTrajectory(traj))
            return []
        if action == "place_move":
            dx = float(args.get("dx_m", 0.0))
            dy = float(args.get("dy_m", 0.0))
            dz = float(args.get("dz_m", 0.0))
            session.apply_command(PlaceMove(dx, dy, dz))
            return []
        if action == "set_ci":
            session.apply_command(SetCI(ConfidenceInterval.parse(str(args.get("ci", "")))))
            return []
        if action == "set_mode":
            session.apply_command(SetMode(FeedbackMode.parse(str(args.get("mode", "")))))
            return []
        if action == "start":
            session.apply_command(Start())
            self.desired_track = []
            return [tunnel_snapshot_frame(session)]
        if action == "reset_tunnel":
            session.apply_command(ResetTunnel())
            return [tunnel_snapshot_frame(session)]
        if action == "stop":
            session.apply_command(Stop())
            return [summary_frame(session, self._error_summary())]
        raise SchemaViolation(f"unknown command action {action!r}")

    def _error_summary(self):
        """End-of-task end-effector error, if the path segments cleanly."""
        session = self.session
        n = session.repetition_count
        if session.trajectory is None or n < 1 or len(session.tracked_path) < 2:
            return None
        t = np.array([s.t_ms for s in session.tracked_path])
        actual = np.stack([s.pos for s in session.tracked_path])
        try:
            segments = analytics.segment_repetitions(
                t, actual, session.trajectory.start_point, n,
                radius=session.params.start_radius)
            desired = self._desired_positions(t, actual, segments)
            reps = analytics.build_repetition_set(
                t, actual, desired, segments, n_samples=self.samples_per_rep)
            return analytics.err_task(reps, exercise_id=session.trajectory.id,
                                      condition=session.ci.name)
        except TunnelTrainerError:
            return None

    def _desired_positions(self, t, actual, segments) -> np.ndarray:
        """Recorded per-sample reference, or the analytic reconstruction."""
        if (len(self.desired_track) == len(actual)
                and all(d is not None for d in self.desired_track)):
            return np.stack(self.desired_track)
        desired = actual.copy()
        for sl in segments:
            desired[sl] = analytics.desired_for_segment(self.session.trajectory, t[sl])
        return desired


def replay(messages, params: FeedbackParams = DEFAULT_PARAMS,
           resolver: Callable[[str], Trajectory] = builtin_resolver) -> tuple[SessionDriver, list[dict]]:
    """Run inbound messages through a fresh driver; return it and all output."""
    driver = SessionDriver(params, resolver)
    out: list[dict] = []
    for msg in messages:
        out.extend(driver.handle(msg))
    return driver, out


# -- inbound message constructors (used by simulator / clients) -----------------

def hand_sample_msg(t_ms: float, pos, desired=None) -> dict:
    msg = {"type": "hand_sample", "t_ms": float(t_ms),
           "pos_m": [float(v) for v in pos]}
    if desired is not None:
        msg["desired_m"] = [float(v) for v in desired]
    return msg


def command_msg(action: str, **args) -> dict:
    return {"type": "command", "action": action, "args": args}


def calibrate_msg(pos) -> dict:
    return command_msg("calibrate", pos_m=[float(v) for v in pos])


def select_msg(traj: Trajectory) -> dict:
    return command_msg("select", trajectory=trajectory_to_dict(traj))


CANONICAL_CALIBRATION = ((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))


def canonical_calibration_msgs() -> list[dict]:
    """Calibration triple that makes tracking space == plane space."""
    return [calibrate_msg(p) for p in CANONICAL_CALIBRATION]
