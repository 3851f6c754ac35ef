"""Synthetic hand-sample streams for the two study conditions.

Open loop models moving between the start/end markers with no live
feedback: a constant-speed carrier stroke plus a per-subject constant bias
and a seeded Ornstein-Uhlenbeck wander. The offset is ramped in and out
near the stroke endpoints (the mover re-anchors at the visible markers) and
the hand rests exactly on the start marker between repetitions, which is
what makes repetition segmentation well defined.

Closed loop runs the same carrier and noise through a live engine session
and, whenever the reported error exceeds a deadband fraction of the tunnel
radius, steers back toward the nearest via-point with a velocity
proportional to the error (step capped so even huge gains cannot
overshoot). Every run is fully determined by its config (seeded RNG).

Logs are plain wire-message lists: calibration, select, set_ci, set_mode,
start, one hand_sample per tick (carrying the desired reference position),
stop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .analytics import stroke_position
from .arm import ArmGeometry, inverse_kinematics
from .config import SimulatorOptions
from .errors import NoConvergence, Unreachable
from .geometry import ConfidenceInterval, Trajectory, generate_exercise
from .protocol import (SessionDriver, canonical_calibration_msgs, command_msg,
                       hand_sample_msg, select_msg)

#: Cycle execution times (s) observed per condition; the no-feedback
#: condition shares the loosest-tunnel pace.
CYCLE_TIME_DEFAULTS = {"no": 4.69, "c1": 4.69, "c2": 4.99, "c3": 6.07}

CONDITION_CI = {"no": ConfidenceInterval.C1, "c1": ConfidenceInterval.C1,
                "c2": ConfidenceInterval.C2, "c3": ConfidenceInterval.C3}

CONDITIONS = tuple(CYCLE_TIME_DEFAULTS)


@dataclass(frozen=True)
class NoiseModel:
    """Constant bias plus OU wander (theta = mean-reversion rate, 1/s)."""

    bias: tuple[float, float, float] = (0.0, 0.0, 0.0)
    wander_sd: float = 0.0
    seed: int = 0
    theta: float = 1.0


@dataclass(frozen=True)
class SimConfig:
    exercise: str = "T1"
    condition: str = "no"           # "no" | "c1" | "c2" | "c3"
    noise: NoiseModel = field(default_factory=NoiseModel)
    cycle_time: float | None = None  # s per repetition stroke; None = default
    repetitions: int = 5
    sample_rate: float = 60.0        # Hz of the simulated visor stream
    gain: float = 2.0                # closed-loop corrective gain (1/s)
    options: SimulatorOptions = field(default_factory=SimulatorOptions)

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown condition {self.condition!r}")
        if self.sample_rate <= 0 or self.repetitions < 1:
            raise ValueError("sample_rate and repetitions must be positive")
        if self.cycle_time is not None and self.cycle_time <= 0:
            raise ValueError("cycle_time must be positive")

    @property
    def resolved_cycle_time(self) -> float:
        return self.cycle_time if self.cycle_time is not None \
            else CYCLE_TIME_DEFAULTS[self.condition]

    @property
    def ci(self) -> ConfidenceInterval:
        return CONDITION_CI[self.condition]


def _preamble(cfg: SimConfig, traj: Trajectory) -> list[dict]:
    msgs = canonical_calibration_msgs()
    msgs.append(select_msg(traj))
    msgs.append(command_msg("set_ci", ci=cfg.ci.name))
    msgs.append(command_msg("set_mode", mode="overwrite"))
    msgs.append(command_msg("start"))
    return msgs


def _tick_plan(cfg: SimConfig) -> tuple[int, int]:
    """(samples per dwell, samples per stroke)."""
    n_dwell = max(1, int(round(cfg.options.dwell_time_s * cfg.sample_rate)))
    n_stroke = max(2, int(round(cfg.resolved_cycle_time * cfg.sample_rate)))
    return n_dwell, n_stroke


def _generate(cfg: SimConfig, traj: Trajectory, closed_loop: bool) -> list[dict]:
    rng = np.random.default_rng([cfg.noise.seed, 1])
    dt = 1.0 / cfg.sample_rate
    theta = cfg.noise.theta
    sigma = cfg.noise.wander_sd * math.sqrt(2.0 * theta)
    bias = np.asarray(cfg.noise.bias, dtype=np.float64)
    n_dwell, n_stroke = _tick_plan(cfg)
    stroke_t = n_stroke * dt
    anchor = cfg.options.anchor_time_s
    deadband = cfg.options.deadband_fraction * cfg.ci.radius
    step = min(cfg.gain * dt, 1.0)

    carrier = stroke_position(traj, np.arange(1, n_stroke + 1) / n_stroke)
    start = traj.start_point

    driver = SessionDriver() if closed_loop else None
    msgs = _preamble(cfg, traj)
    if driver is not None:
        for m in msgs:
            driver.handle(m)

    ou = np.zeros(3)
    corr = np.zeros(3)
    tick = 0

    def emit(pos, desired):
        nonlocal tick
        msg = hand_sample_msg(tick * 1000.0 * dt, pos, desired)
        msgs.append(msg)
        tick += 1
        return msg

    def advance_noise():
        nonlocal ou
        ou = ou + (-theta * ou * dt + sigma * math.sqrt(dt) * rng.standard_normal(3))

    for _ in range(cfg.repetitions):
        for _ in range(n_dwell):
            advance_noise()
            msg = emit(start, start)
            if driver is not None:
                driver.handle(msg)
        for k in range(n_stroke):
            advance_noise()
            tau = (k + 1) * dt
            w = min(1.0, tau / anchor, (stroke_t - tau) / anchor)
            w = max(0.0, w)
            pos = carrier[k] + w * (bias + ou + corr)
            msg = emit(pos, carrier[k])
            if driver is not None:
                out = driver.handle(msg)[0]
                if closed_loop and out.get("type") == "feedback" \
                        and out["current_error_m"] is not None \
                        and out["current_error_m"] > deadband:
                    target = traj.via_points[out["nearest_index"]]
                    corr = corr + step * (target - pos)
    for _ in range(n_dwell):
        advance_noise()
        msg = emit(start, start)
        if driver is not None:
            driver.handle(msg)

    msgs.append(command_msg("stop"))
    if driver is not None:
        driver.handle(msgs[-1])
    return msgs


def run_open_loop(cfg: SimConfig, traj: Trajectory | None = None) -> list[dict]:
    """No-feedback condition: carrier + noise, feedback ignored."""
    if cfg.condition != "no":
        cfg = replace(cfg, condition="no")
    traj = traj if traj is not None else generate_exercise(cfg.exercise)
    return _generate(cfg, traj, closed_loop=False)


def run_closed_loop(cfg: SimConfig, traj: Trajectory | None = None,
                    gain: float | None = None) -> list[dict]:
    """Feedback condition: the live FeedbackUpdate steers the hand back
    into the tunnel whenever the error leaves the deadband."""
    if cfg.condition == "no":
        raise ValueError("closed loop needs a feedback condition (c1/c2/c3)")
    if gain is not None:
        cfg = replace(cfg, gain=gain)
    traj = traj if traj is not None else generate_exercise(cfg.exercise)
    return _generate(cfg, traj, closed_loop=True)


def run_condition(cfg: SimConfig, traj: Trajectory | None = None) -> list[dict]:
    if cfg.condition == "no":
        return run_open_loop(cfg, traj)
    return run_closed_loop(cfg, traj)


# -- joint-space conversion ------------------------------------------------------

_SEED_CANDIDATES = (
    (0.0, 0.5, 0.0, 1.2),
    (0.3, 0.3, 0.0, 1.6),
    (-0.3, 0.6, 0.0, 0.8),
    (0.0, 0.0, 0.0, 0.5),
)


def to_joint_log(t_ms, positions, geometry: ArmGeometry,
                 seed=None) -> np.ndarray:
    """Convert an end-effector path to joint angles, sample by sample.

    Each solve is seeded with the previous solution so the joint path stays
    on one continuous branch. The arm is redundant, so the branch is pinned
    by the initial configuration: pass *seed* when it is known (a robot
    reads it from its encoders); otherwise a deterministic candidate list
    picks one. Unreachable/NoConvergence failures are re-raised with the
    offending sample index.
    """
    pos = np.asarray(positions, dtype=np.float64)
    out = np.empty((len(pos), 4))
    prev = None if seed is None else np.asarray(seed, dtype=np.float64)
    for i, p in enumerate(pos):
        try:
            if prev is None:
                prev = _first_solution(geometry, p)
            else:
                prev = inverse_kinematics(geometry, p, prev)
        except (Unreachable, NoConvergence) as e:
            raise type(e)(f"sample {i} (t={np.asarray(t_ms)[i]:.1f} ms): {e}") from None
        out[i] = prev
    return out


def _first_solution(geometry: ArmGeometry, target) -> np.ndarray:
    last: Exception | None = None
    for seed in _SEED_CANDIDATES:
        try:
            return inverse_kinematics(geometry, target, np.array(seed))
        except NoConvergence as e:
            last = e
    raise last


# -- sweeps ------------------------------------------------------------------------

DEFAULT_BIAS_SD = 0.008   # m, per-subject constant bias scale
DEFAULT_WANDER_SD = 0.006  # m, OU wander stationary SD


def subject_noise(seed: int, bias_sd: float = DEFAULT_BIAS_SD,
                  wander_sd: float = DEFAULT_WANDER_SD) -> NoiseModel:
    """Per-subject noise: the bias is drawn from the seed, the wander is
    generated inside the run from an independent child stream."""
    bias = np.random.default_rng([seed, 0]).normal(0.0, bias_sd, 3)
    return NoiseModel(bias=tuple(float(b) for b in bias), wander_sd=wander_sd,
                      seed=seed)


def sweep_configs(exercise: str, seed: int, feedback_condition: str = "c2",
                  gain: float = 2.0) -> tuple[SimConfig, SimConfig]:
    """Paired (open-loop, closed-loop) configs sharing one noise model."""
    noise = subject_noise(seed)
    open_cfg = SimConfig(exercise=exercise, condition="no", noise=noise)
    closed_cfg = SimConfig(exercise=exercise, condition=feedback_condition,
                           noise=noise, gain=gain)
    return open_cfg, closed_cfg
