"""End-to-end analysis: session log in, error summaries out.

A log is replayed through a fresh engine (which reproduces the session's
local-frame tracked path and the per-sample desired reference, when the
log recorded one), segmented into repetitions, time-normalized and
aggregated. Joint-space analysis converts both the actual and the desired
end-effector signals through the inverse kinematics of the configured arm
and reuses the same repetition boundaries.
"""

from __future__ import annotations

import numpy as np

from . import analytics
from .analytics import ErrorSummary
from .arm import ArmGeometry
from .errors import SchemaViolation
from .protocol import SessionDriver, replay
from .simulate import run_condition, sweep_configs, to_joint_log
from .storage import read_inbound_messages, summary_row


def _tracked_arrays(driver: SessionDriver):
    path = driver.session.tracked_path
    if len(path) < 2:
        raise SchemaViolation("log contains fewer than 2 accepted samples")
    t = np.array([s.t_ms for s in path])
    actual = np.stack([s.pos for s in path])
    if (len(driver.desired_track) == len(path)
            and all(d is not None for d in driver.desired_track)):
        desired = np.stack(driver.desired_track)
    else:
        desired = None
    return t, actual, desired


def analyze_messages(messages, space: str = "ee", n_expected: int = 5,
                     geometry: ArmGeometry | None = None,
                     radius: float = analytics.DEFAULT_START_RADIUS,
                     debounce_ms: float = analytics.DEFAULT_DEBOUNCE_MS,
                     n_samples: int = analytics.DEFAULT_SAMPLES_PER_REP,
                     subject_id: str = "", condition: str = "") -> ErrorSummary:
    """Replay a session log and compute its task error summary."""
    driver, _ = replay(messages)
    session = driver.session
    if session.trajectory is None:
        raise SchemaViolation("log never selected a trajectory")
    t, actual, desired = _tracked_arrays(driver)
    segments = analytics.segment_repetitions(
        t, actual, session.trajectory.start_point, n_expected,
        radius=radius, debounce_ms=debounce_ms)
    if desired is None:
        desired = actual.copy()
        for sl in segments:
            desired[sl] = analytics.desired_for_segment(session.trajectory, t[sl])

    exercise = session.trajectory.id
    if space == "ee":
        reps = analytics.build_repetition_set(t, actual, desired, segments,
                                              n_samples=n_samples, space="ee")
        return analytics.err_task(reps, subject_id=subject_id,
                                  exercise_id=exercise, condition=condition)
    if space == "joint":
        geometry = geometry if geometry is not None else ArmGeometry()
        q_act = to_joint_log(t, actual, geometry)
        q_des = to_joint_log(t, desired, geometry)
        reps = analytics.build_repetition_set(t, q_act, q_des, segments,
                                              n_samples=n_samples, space="joint")
        return analytics.joint_err_task(reps, subject_id=subject_id,
                                        exercise_id=exercise, condition=condition)
    raise ValueError(f"unknown space {space!r}")


def analyze_log_file(path, **kwargs) -> ErrorSummary:
    return analyze_messages(read_inbound_messages(path), **kwargs)


DEFAULT_SWEEP_EXERCISES = ("T1", "T2", "T3", "T4")
DEFAULT_SWEEP_SEEDS = tuple(range(15))


def run_default_sweep(exercises=DEFAULT_SWEEP_EXERCISES,
                      seeds=DEFAULT_SWEEP_SEEDS, feedback_condition: str = "c2",
                      gain: float = 2.0, spaces=("ee",),
                      geometry: ArmGeometry | None = None) -> list[dict]:
    """Paired open/closed simulation sweep; one analytics row per run.

    Every (exercise, seed) pair runs both conditions with identical noise.
    Returns rows shaped for the analytics CSV: subject, exercise, condition,
    space, err (err in SI units; CSV writing converts joint errors to
    degrees).
    """
    rows: list[dict] = []
    for seed in seeds:
        for exercise in exercises:
            open_cfg, closed_cfg = sweep_configs(exercise, seed,
                                                 feedback_condition, gain)
            for cfg in (open_cfg, closed_cfg):
                messages = run_condition(cfg)
                for space in spaces:
                    summary = analyze_messages(
                        messages, space=space, n_expected=cfg.repetitions,
                        geometry=geometry, subject_id=f"s{seed}",
                        condition=cfg.condition)
                    rows.append(summary_row(summary))
    return rows


def paired_condition_means(rows, condition_a: str, condition_b: str,
                           space: str = "ee") -> tuple[list[str], np.ndarray, np.ndarray]:
    """Aggregate sweep rows into per-subject mean errors for two conditions.

    Subjects appearing in both conditions (any exercises) contribute one
    pair: the mean error across their exercises per condition.
    """
    per: dict[str, dict[str, list[float]]] = {}
    for row in rows:
        if row["space"] != space:
            continue
        subj = per.setdefault(row["subject"], {})
        subj.setdefault(row["condition"], []).append(float(row["err"]))
    subjects, a_vals, b_vals = [], [], []
    for subject in sorted(per, key=_subject_key):
        conds = per[subject]
        if condition_a in conds and condition_b in conds:
            subjects.append(subject)
            a_vals.append(float(np.mean(conds[condition_a])))
            b_vals.append(float(np.mean(conds[condition_b])))
    return subjects, np.asarray(a_vals), np.asarray(b_vals)


def _subject_key(name: str):
    digits = "".join(ch for ch in name if ch.isdigit())
    return (int(digits) if digits else 0, name)
