"""Live session engine: state machine, per-sphere scoring and feedback.

A session walks Calibrating -> Selecting -> Executing -> Stopped. While
executing, every incoming hand sample is scored against the closest
via-point of the selected trajectory and the affected sphere's appearance
(scale + color on a dark-green..red ramp) is updated. Two feedback modes
exist: Overwrite keeps each sphere's best score for the whole task so the
user sees cumulative improvement; ResetPerRep repaints the tunnel red at
every repetition boundary (re-entry into a small sphere around the start
point after having left it).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import math

import numpy as np

from .errors import InvalidCommand, NonMonotonicTime, WrongPhase
from .geometry import (ConfidenceInterval, DEFAULT_SPACING, Frame, Trajectory,
                       Vec3, arc_length, as_vec3, frame_from_three_points,
                       resample_polyline)
from .spatial import SpatialIndex, build_spatial_index


@dataclass(frozen=True)
class FeedbackParams:
    """Constants of the error -> appearance mapping (configurable)."""

    scale_min: float = 0.3
    color_zero: tuple[int, int, int] = (0, 100, 0)   # dark green at zero error
    color_full: tuple[int, int, int] = (255, 0, 0)   # red at/beyond the CI radius
    start_radius: float = 0.03                        # repetition-boundary sphere


DEFAULT_PARAMS = FeedbackParams()


def feedback_for_error(distance: float, ci: ConfidenceInterval,
                       params: FeedbackParams = DEFAULT_PARAMS) -> tuple[float, tuple[int, int, int]]:
    """Map a distance-to-path to a sphere (scale, color).

    The allowed deviation is the tunnel radius (CI diameter / 2): zero error
    gives the smallest, dark-green sphere; at or beyond the radius the
    sphere saturates at full scale, pure red.
    """
    if distance < 0:
        raise ValueError("distance must be non-negative")
    u = distance / ci.radius
    if u >= 1.0:
        u = 1.0
    scale = params.scale_min + (1.0 - params.scale_min) * u
    c0, c1 = params.color_zero, params.color_full
    color = (round(c0[0] + (c1[0] - c0[0]) * u),
             round(c0[1] + (c1[1] - c0[1]) * u),
             round(c0[2] + (c1[2] - c0[2]) * u))
    return scale, color


class Phase(Enum):
    CALIBRATING = "calibrating"
    SELECTING = "selecting"
    EXECUTING = "executing"
    STOPPED = "stopped"


class FeedbackMode(Enum):
    OVERWRITE = "overwrite"
    RESET_PER_REP = "reset_per_rep"

    @staticmethod
    def parse(name: str) -> "FeedbackMode":
        try:
            return FeedbackMode(name.lower())
        except ValueError:
            raise ValueError(f"unknown feedback mode {name!r}") from None


@dataclass(frozen=True)
class HandSample:
    """One tracked hand-centroid sample, in the calibrated local frame."""

    t_ms: float
    pos: Vec3

    def __post_init__(self):
        object.__setattr__(self, "pos", as_vec3(self.pos))


@dataclass(frozen=True)
class SphereState:
    index: int
    scale: float
    color: tuple[int, int, int]


@dataclass(frozen=True)
class FeedbackUpdate:
    """Immutable result of scoring one sample (safe to hand to other threads).

    ``changed`` lists only spheres whose rendered state actually changed.
    """

    changed: tuple[SphereState, ...]
    current_error: float
    nearest_index: int
    path_point: Vec3


class TunnelState:
    """Per-sphere best errors and rendered appearance."""

    def __init__(self, n_spheres: int, ci: ConfidenceInterval,
                 mode: FeedbackMode, params: FeedbackParams):
        self.ci = ci
        self.mode = mode
        self.params = params
        self.best_error = np.full(n_spheres, np.inf)
        full = feedback_for_error(math.inf, ci, params)
        self.scale = np.full(n_spheres, full[0])
        self.color = [full[1]] * n_spheres

    def __len__(self) -> int:
        return len(self.best_error)

    def sphere(self, i: int) -> SphereState:
        return SphereState(i, float(self.scale[i]), self.color[i])

    def all_spheres(self) -> tuple[SphereState, ...]:
        return tuple(self.sphere(i) for i in range(len(self)))

    def observe(self, i: int, distance: float) -> SphereState | None:
        """Fold a new observation into sphere *i*; return it if it changed."""
        if distance >= self.best_error[i]:
            return None
        self.best_error[i] = distance
        scale, color = feedback_for_error(distance, self.ci, self.params)
        if scale == self.scale[i] and color == self.color[i]:
            return None
        self.scale[i] = scale
        self.color[i] = color
        return self.sphere(i)

    def reset(self) -> tuple[SphereState, ...]:
        """Repaint the whole tunnel red; return the spheres that changed."""
        changed = []
        full_scale, full_color = feedback_for_error(math.inf, self.ci, self.params)
        for i in range(len(self)):
            if self.scale[i] != full_scale or self.color[i] != full_color:
                changed.append(SphereState(i, full_scale, full_color))
        self.best_error[:] = np.inf
        self.scale[:] = full_scale
        self.color = [full_color] * len(self.color)
        return tuple(changed)


# -- commands ----------------------------------------------------------------

@dataclass(frozen=True)
class Calibrate:
    point: Vec3  # world coordinates

    def __post_init__(self):
        object.__setattr__(self, "point", as_vec3(self.point))


@dataclass(frozen=True)
class SelectTrajectory:
    trajectory: Trajectory


@dataclass(frozen=True)
class PlaceMove:
    """Translate the trajectory base. Only the in-plane components apply;
    a requested vertical offset is ignored (placement is locked to the
    calibrated plane level)."""

    dx: float
    dy: float
    dz: float = 0.0


@dataclass(frozen=True)
class SetCI:
    ci: ConfidenceInterval


@dataclass(frozen=True)
class SetMode:
    mode: FeedbackMode


@dataclass(frozen=True)
class Start:
    pass


@dataclass(frozen=True)
class Stop:
    pass


@dataclass(frozen=True)
class ResetTunnel:
    pass


Command = (Calibrate | SelectTrajectory | PlaceMove | SetCI | SetMode
           | Start | Stop | ResetTunnel)


class Session:
    """One user's live training session.

    Single-writer: the sample/command stream must be applied in order.
    Emitted FeedbackUpdate values are immutable snapshots.
    """

    def __init__(self, params: FeedbackParams = DEFAULT_PARAMS):
        self.params = params
        self.phase = Phase.CALIBRATING
        self.frame: Frame | None = None
        self.calibration_points: list[Vec3] = []
        self.trajectory: Trajectory | None = None
        self.ci = ConfidenceInterval.C1
        self.mode = FeedbackMode.OVERWRITE
        self.tunnel: TunnelState | None = None
        self.tracked_path: list[HandSample] = []
        self.repetition_count = 0
        self._index: SpatialIndex | None = None
        self._last_t = -math.inf
        self._left_start = False

    @classmethod
    def with_frame(cls, frame: Frame, params: FeedbackParams = DEFAULT_PARAMS) -> "Session":
        """Start a session whose calibration happened elsewhere."""
        s = cls(params)
        s.frame = frame
        s.phase = Phase.SELECTING
        return s

    # -- commands -------------------------------------------------------------

    def apply_command(self, cmd: Command) -> "Session":
        if isinstance(cmd, Calibrate):
            self._require(Phase.CALIBRATING, "calibrate")
            self.calibration_points.append(cmd.point)
            if len(self.calibration_points) == 3:
                try:
                    self.frame = frame_from_three_points(*self.calibration_points)
                except Exception:
                    self.calibration_points.clear()  # restart calibration
                    raise
                self.phase = Phase.SELECTING
        elif isinstance(cmd, SelectTrajectory):
            self._require(Phase.SELECTING, "select")
            self.trajectory = cmd.trajectory
        elif isinstance(cmd, PlaceMove):
            self._require(Phase.SELECTING, "place_move")
            if self.trajectory is None:
                raise InvalidCommand("place_move before a trajectory was selected")
            self.trajectory = self.trajectory.translated(cmd.dx, cmd.dy)
        elif isinstance(cmd, SetCI):
            self._require(Phase.SELECTING, "set_ci")
            self.ci = cmd.ci
        elif isinstance(cmd, SetMode):
            self._require((Phase.SELECTING, Phase.EXECUTING), "set_mode")
            self.mode = cmd.mode
            if self.tunnel is not None:
                self.tunnel.mode = cmd.mode
        elif isinstance(cmd, Start):
            self._require(Phase.SELECTING, "start")
            if self.trajectory is None:
                raise InvalidCommand("start before a trajectory was selected")
            self.tunnel = TunnelState(len(self.trajectory.via_points), self.ci,
                                      self.mode, self.params)
            self._index = build_spatial_index(self.trajectory, self.ci)
            self.tracked_path = []
            self.repetition_count = 0
            self._last_t = -math.inf
            self._left_start = False
            self.phase = Phase.EXECUTING
        elif isinstance(cmd, Stop):
            self._require(Phase.EXECUTING, "stop")
            self.phase = Phase.STOPPED
        elif isinstance(cmd, ResetTunnel):
            self._require(Phase.EXECUTING, "reset_tunnel")
            self.tunnel.reset()
            self._left_start = False
        else:
            raise InvalidCommand(f"unknown command {cmd!r}")
        return self

    def _require(self, phases, action: str):
        if isinstance(phases, Phase):
            phases = (phases,)
        if self.phase not in phases:
            raise WrongPhase(f"{action} not allowed in phase {self.phase.value}")

    # -- sample ingestion -----------------------------------------------------

    def sample_from_world(self, t_ms: float, pos_world) -> HandSample:
        """Build a local-frame HandSample from tracking-space coordinates."""
        if self.frame is None:
            raise WrongPhase("no calibrated frame yet")
        return HandSample(t_ms, self.frame.world_to_local(pos_world))

    def process_sample(self, sample: HandSample) -> FeedbackUpdate:
        """Score one sample and update the tunnel. Executing phase only."""
        if self.phase is not Phase.EXECUTING:
            raise WrongPhase(f"samples not accepted in phase {self.phase.value}")
        if sample.t_ms < self._last_t:
            raise NonMonotonicTime(
                f"t_ms {sample.t_ms} after {self._last_t}")
        self._last_t = sample.t_ms

        changed: list[SphereState] = []

        # Repetition boundary: re-entering the start sphere after leaving it.
        d = sample.pos - self.trajectory.start_point
        d_start = math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
        if self._left_start:
            if d_start <= self.params.start_radius:
                self.repetition_count += 1
                self._left_start = False
                if self.mode is FeedbackMode.RESET_PER_REP:
                    changed.extend(self.tunnel.reset())
        elif d_start > self.params.start_radius:
            self._left_start = True

        nearest, dist = self._index.query(sample.pos)
        updated = self.tunnel.observe(nearest, dist)
        if updated is not None:
            changed.append(updated)
        self.tracked_path.append(sample)
        return FeedbackUpdate(tuple(changed), dist, nearest, sample.pos)


def process_sample(session: Session, sample: HandSample) -> FeedbackUpdate:
    return session.process_sample(sample)


def apply_command(session: Session, cmd: Command) -> Session:
    return session.apply_command(cmd)


def record_demonstration(samples: list[HandSample], spacing: float = DEFAULT_SPACING,
                         smooth_window: int = 5, trajectory_id: str = "demo",
                         author: str | None = None) -> Trajectory:
    """Turn a recorded hand sweep into a reusable trajectory.

    The raw path is smoothed with a centered moving average (window shrinks
    symmetrically toward the ends, so the endpoints are kept), then
    resampled to uniform via-point spacing.
    """
    if len(samples) < 2:
        raise ValueError("need at least 2 samples")
    if smooth_window < 1:
        raise ValueError("smooth_window must be >= 1")
    raw = np.stack([s.pos for s in samples])
    pts = resample_polyline(_moving_average(raw, smooth_window), spacing)
    # Residual sample-scale wiggle survives the first pass; one more light
    # average at the via-point scale keeps consecutive spacing uniform.
    if len(pts) > 2:
        pts = resample_polyline(_moving_average(pts, 3), spacing)
    achieved = arc_length(pts) / (len(pts) - 1)
    metadata = {"author": author or "unknown", "source": "demonstration"}
    return Trajectory(id=trajectory_id, via_points=pts, spacing=achieved,
                      metadata=metadata)


def _moving_average(points: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average; the window shrinks symmetrically at the
    ends so the first and last points are preserved exactly."""
    half = window // 2
    n = len(points)
    out = np.empty_like(points)
    for i in range(n):
        k = min(half, i, n - 1 - i)
        out[i] = points[i - k:i + k + 1].mean(axis=0)
    return out
