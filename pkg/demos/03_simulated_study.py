"""A miniature version of the study protocol, fully simulated.

For a few synthetic subjects: run every exercise without feedback and with
the mid tunnel, compute the task errors, and compare conditions with the
paired signed-rank test.
"""

import numpy as np

from tunneltrainer.pipeline import analyze_messages, paired_condition_means
from tunneltrainer.simulate import run_closed_loop, run_open_loop, sweep_configs
from tunneltrainer.stats import wilcoxon_signed_rank
from tunneltrainer.storage import summary_row

rows = []
for seed in range(6):                      # 6 synthetic subjects
    for exercise in ("T1", "T2", "T3", "T4"):
        open_cfg, closed_cfg = sweep_configs(exercise, seed)
        for cfg, messages in ((open_cfg, run_open_loop(open_cfg)),
                              (closed_cfg, run_closed_loop(closed_cfg))):
            summary = analyze_messages(messages, n_expected=5,
                                       subject_id=f"s{seed}",
                                       condition=cfg.condition)
            rows.append(summary_row(summary))
            print(f"s{seed} {exercise} {cfg.condition:>3}: "
                  f"{summary.err*100:.2f} cm")

subjects, no_fb, with_fb = paired_condition_means(rows, "no", "c2")
print("\nper-subject means (cm):")
for s, a, b in zip(subjects, no_fb, with_fb):
    print(f"  {s}: {a*100:.2f} -> {b*100:.2f}")

res = wilcoxon_signed_rank(no_fb, with_fb)
print(f"\nglobal: {no_fb.mean()*100:.2f} cm without feedback vs "
      f"{with_fb.mean()*100:.2f} cm with;")
print(f"Wilcoxon signed-rank: W={res.statistic}, p={res.p_value:.4f} "
      f"({res.method})")
