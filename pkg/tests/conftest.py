import time

import numpy as np
import pytest

from tunneltrainer.geometry import generate_exercise


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture(scope="session")
def exercises():
    return {tid: generate_exercise(tid) for tid in ("T1", "T2", "T3", "T4")}


@pytest.fixture(scope="session")
def default_sweep():
    """The full paired simulation sweep, shared across acceptance criteria.

    The end-effector phase (simulation + ee analysis, the part with a
    runtime budget) is timed separately from the joint-space conversion.
    """
    from tunneltrainer.pipeline import analyze_messages
    from tunneltrainer.simulate import run_closed_loop, run_open_loop, sweep_configs
    from tunneltrainer.storage import summary_row

    ee_rows, joint_rows = [], []
    ee_elapsed = 0.0
    for seed in range(15):
        for exercise in ("T1", "T2", "T3", "T4"):
            open_cfg, closed_cfg = sweep_configs(exercise, seed)
            t0 = time.perf_counter()
            runs = [(open_cfg, run_open_loop(open_cfg)),
                    (closed_cfg, run_closed_loop(closed_cfg))]
            for cfg, messages in runs:
                summary = analyze_messages(messages, space="ee", n_expected=5,
                                           subject_id=f"s{seed}",
                                           condition=cfg.condition)
                ee_rows.append(summary_row(summary))
            ee_elapsed += time.perf_counter() - t0
            for cfg, messages in runs:
                summary = analyze_messages(messages, space="joint", n_expected=5,
                                           subject_id=f"s{seed}",
                                           condition=cfg.condition)
                joint_rows.append(summary_row(summary))
    return {"ee_rows": ee_rows, "joint_rows": joint_rows,
            "ee_elapsed": ee_elapsed}
