"""Offline error pipeline: repetition segmentation, time normalization and
the per-task error aggregation, in end-effector and joint space.

A repetition spans from leaving a small sphere around the trajectory start
point to re-entering it; boundary crossings shorter than a debounce window
are ignored. Each repetition is resampled to a fixed number of
normalized-time samples and compared against the desired signal sample by
sample: the per-sample error is the Euclidean deviation, averaged first
within a repetition and then across repetitions.

In joint space the deviation is evaluated joint by joint (absolute angular
difference), aggregated the same way per joint, then averaged across the
four joints. Angles are radians internally and degrees at file boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SegmentationFailed
from .geometry import Trajectory, as_points, as_vec3

DEFAULT_SAMPLES_PER_REP = 200   # normalized-time samples per repetition
DEFAULT_START_RADIUS = 0.03     # m
DEFAULT_DEBOUNCE_MS = 500.0


@dataclass
class RepetitionSet:
    """N repetitions x I normalized samples of (actual, desired) signals.

    ``space`` is "ee" (3-D positions, meters) or "joint" (4 angles, radians).
    """

    actual: np.ndarray   # (N, I, D)
    desired: np.ndarray  # (N, I, D)
    space: str = "ee"

    def __post_init__(self):
        self.actual = np.asarray(self.actual, dtype=np.float64)
        self.desired = np.asarray(self.desired, dtype=np.float64)
        if self.actual.shape != self.desired.shape:
            raise ValueError("actual/desired shapes differ")
        if self.actual.ndim != 3:
            raise ValueError("expected (N, I, D) arrays")
        want = {"ee": 3, "joint": 4}.get(self.space)
        if want is None:
            raise ValueError(f"unknown space {self.space!r}")
        if self.actual.shape[2] != want:
            raise ValueError(
                f"{self.space} space expects D={want}, got {self.actual.shape[2]}")


@dataclass
class ErrorSummary:
    """Aggregated task error (meters for ee space, radians for joint space)."""

    err: float
    per_rep_mean: np.ndarray       # (N,)
    per_sample_rmse: np.ndarray    # (N, I)
    space: str
    subject_id: str = ""
    exercise_id: str = ""
    condition: str = ""

    def to_dict(self) -> dict:
        out = {
            "err": self.err,
            "space": self.space,
            "per_rep_mean": [float(v) for v in self.per_rep_mean],
            "n_repetitions": int(len(self.per_rep_mean)),
            "samples_per_rep": int(self.per_sample_rmse.shape[1]),
        }
        if self.space == "joint":
            out["err_deg"] = float(np.degrees(self.err))
        for key, val in (("subject", self.subject_id),
                         ("exercise", self.exercise_id),
                         ("condition", self.condition)):
            if val:
                out[key] = val
        return out


def segment_repetitions(t_ms, positions, start, n_expected: int,
                        radius: float = DEFAULT_START_RADIUS,
                        debounce_ms: float = DEFAULT_DEBOUNCE_MS) -> list[slice]:
    """Split a tracked path into repetition slices.

    *t_ms*/*positions* are parallel arrays; *start* is the trajectory start
    point. A repetition runs from the sample that leaves the start sphere to
    the sample that re-enters it, inclusive. State flips that do not hold
    for *debounce_ms* are treated as boundary jitter; the end of the path
    confirms whatever state it is in. Raises SegmentationFailed when the
    number of detected repetitions differs from *n_expected*.
    """
    t = np.asarray(t_ms, dtype=np.float64)
    pos = as_points(positions)
    if len(t) != len(pos):
        raise ValueError("t_ms and positions lengths differ")
    if len(t) == 0:
        raise SegmentationFailed(0, n_expected)
    start = as_vec3(start)
    inside = np.linalg.norm(pos - start, axis=1) <= radius

    n = len(inside)
    events: list[tuple[int, bool]] = []  # (index, new inside-state)
    cur = bool(inside[0])
    i = 1
    while i < n:
        if inside[i] == cur:
            i += 1
            continue
        j = i
        while j < n and inside[j] == inside[i]:
            j += 1
        held = t[j - 1] - t[i]
        if j == n or held >= debounce_ms:
            events.append((i, bool(inside[i])))
            cur = bool(inside[i])
        i = j

    if not inside[0]:
        # Path starts mid-stroke: treat the first sample as the exit.
        events.insert(0, (0, False))

    segments: list[slice] = []
    open_exit: int | None = None
    for idx, state in events:
        if not state and open_exit is None:
            open_exit = idx
        elif state and open_exit is not None:
            segments.append(slice(open_exit, idx + 1))
            open_exit = None

    if len(segments) != n_expected:
        raise SegmentationFailed(len(segments), n_expected)
    return segments


def time_normalize(t_ms, values, n_samples: int) -> np.ndarray:
    """Resample a segment to *n_samples* uniform normalized-time points.

    Linear interpolation over the segment's own time axis; the first and
    last samples are preserved exactly. Falls back to index parameterization
    if the segment spans zero time.
    """
    t = np.asarray(t_ms, dtype=np.float64)
    x = np.asarray(values, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if len(t) != len(x) or len(t) < 2:
        raise ValueError("need >= 2 parallel samples")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    span = t[-1] - t[0]
    if span > 0:
        u = (t - t[0]) / span
    else:
        u = np.linspace(0.0, 1.0, len(t))
    targets = np.linspace(0.0, 1.0, n_samples)
    out = np.empty((n_samples, x.shape[1]))
    for k in range(x.shape[1]):
        out[:, k] = np.interp(targets, u, x[:, k])
    out[0] = x[0]
    out[-1] = x[-1]
    return out


def sample_rmse(actual, desired) -> float:
    """Per-sample kinematic error: Euclidean norm of (actual - desired)."""
    a = np.asarray(actual, dtype=np.float64)
    d = np.asarray(desired, dtype=np.float64)
    if a.shape != d.shape:
        raise ValueError("actual/desired shapes differ")
    return float(np.sqrt(np.sum((a - d) ** 2)))


def err_task(reps: RepetitionSet, subject_id: str = "", exercise_id: str = "",
             condition: str = "") -> ErrorSummary:
    """Aggregate the end-effector task error: per-sample Euclidean deviation,
    mean within each repetition, then mean across repetitions."""
    if reps.space != "ee":
        raise ValueError("err_task expects an end-effector RepetitionSet")
    diff = reps.actual - reps.desired
    per_sample = np.sqrt(np.sum(diff * diff, axis=2))   # (N, I)
    per_rep = per_sample.mean(axis=1)                   # (N,)
    return ErrorSummary(err=float(per_rep.mean()), per_rep_mean=per_rep,
                        per_sample_rmse=per_sample, space="ee",
                        subject_id=subject_id, exercise_id=exercise_id,
                        condition=condition)


def joint_err_task(reps: RepetitionSet, subject_id: str = "", exercise_id: str = "",
                   condition: str = "") -> ErrorSummary:
    """Joint-space task error: |dq| per joint, aggregated like the
    end-effector error per joint, then averaged across the four joints.

    The stored per-sample values are the across-joint means, so
    err == mean(per_rep_mean) holds in joint space too.
    """
    if reps.space != "joint":
        raise ValueError("joint_err_task expects a joint RepetitionSet")
    dev = np.abs(reps.actual - reps.desired)   # (N, I, 4)
    per_joint_err = dev.mean(axis=(0, 1))      # (4,) full aggregation per joint
    per_sample = dev.mean(axis=2)              # (N, I) across-joint mean
    per_rep = per_sample.mean(axis=1)
    return ErrorSummary(err=float(per_joint_err.mean()), per_rep_mean=per_rep,
                        per_sample_rmse=per_sample, space="joint",
                        subject_id=subject_id, exercise_id=exercise_id,
                        condition=condition)


# -- desired-signal reconstruction -------------------------------------------

def stroke_position(traj: Trajectory, u):
    """Ideal hand position at normalized stroke time *u* in [0, 1].

    Open paths are traversed out and back at constant arc-length speed
    (turnaround at u = 0.5); closed paths once around. Accepts scalar or
    array *u*; returns (3,) or (len(u), 3).
    """
    pts = traj.via_points
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    uu = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if traj.is_closed:
        s = np.clip(uu, 0.0, 1.0) * total
    else:
        v = np.clip(uu, 0.0, 1.0)
        s = np.where(v <= 0.5, 2.0 * v, 2.0 - 2.0 * v) * total
    out = np.empty((len(uu), 3))
    for k in range(3):
        out[:, k] = np.interp(s, cum, pts[:, k])
    return out[0] if np.isscalar(u) or np.ndim(u) == 0 else out


def desired_for_segment(traj: Trajectory, t_ms) -> np.ndarray:
    """Analytic desired positions for a segment's timestamps.

    Fallback reference for logs that carry no recorded desired signal: the
    ideal stroke, constant speed, aligned to the segment's own time span.
    """
    t = np.asarray(t_ms, dtype=np.float64)
    span = t[-1] - t[0]
    u = (t - t[0]) / span if span > 0 else np.linspace(0.0, 1.0, len(t))
    return stroke_position(traj, u)


def repetitions_from_path(t_ms, actual, desired, start, n_expected: int,
                          radius: float = DEFAULT_START_RADIUS,
                          debounce_ms: float = DEFAULT_DEBOUNCE_MS,
                          n_samples: int = DEFAULT_SAMPLES_PER_REP) -> RepetitionSet:
    """Segment a tracked end-effector path and normalize every repetition.

    *desired* must be parallel to *actual* (recorded reference signal or a
    reconstruction). Both are cropped to the same segment samples and
    normalized on the same time axis, so a perfectly tracking path yields
    exactly zero error.
    """
    segments = segment_repetitions(t_ms, actual, start, n_expected,
                                   radius, debounce_ms)
    return build_repetition_set(t_ms, actual, desired, segments,
                                n_samples=n_samples, space="ee")


def build_repetition_set(t_ms, actual, desired, segments: list[slice],
                         n_samples: int = DEFAULT_SAMPLES_PER_REP,
                         space: str = "ee") -> RepetitionSet:
    """Normalize pre-computed segments of parallel actual/desired signals."""
    t = np.asarray(t_ms, dtype=np.float64)
    act = np.asarray(actual, dtype=np.float64)
    des = np.asarray(desired, dtype=np.float64)
    a_reps, d_reps = [], []
    for sl in segments:
        a_reps.append(time_normalize(t[sl], act[sl], n_samples))
        d_reps.append(time_normalize(t[sl], des[sl], n_samples))
    return RepetitionSet(np.stack(a_reps), np.stack(d_reps), space=space)
