"""Usability and acceptance scoring: SUS, Cronbach's alpha, TAM.

Synthetic answer sheets only; the arithmetic is the point.
"""

import numpy as np

from tunneltrainer.stats import cronbach_alpha, sus_score, tam_report

rng = np.random.default_rng(12)

# --- SUS: ten items, odd positive / even negative, score 0..100 ------------
sheets = []
for _ in range(12):
    positive = rng.integers(3, 6, 5)      # leaning agree
    negative = rng.integers(1, 4, 5)      # leaning disagree
    sheet = np.empty(10, dtype=int)
    sheet[0::2] = positive
    sheet[1::2] = negative
    sheets.append(sheet)
scores = [sus_score(s) for s in sheets]
print("SUS scores:", [f"{s:.1f}" for s in scores])
print(f"cohort: {np.mean(scores):.1f} +- {np.std(scores, ddof=1):.1f} "
      f"(acceptability threshold 68)")

# --- internal consistency ----------------------------------------------------
shared = rng.normal(0, 1, 40)
items = np.stack([np.clip(np.round(3 + shared + rng.normal(0, 0.6, 40)), 1, 5)
                  for _ in range(4)], axis=1)
print("\nCronbach's alpha of 4 related items:", round(cronbach_alpha(items), 3))

# --- TAM categories, correlations and the no-intercept regressions ----------
def category(level, items_n, n=12):
    attitude = rng.normal(0, 0.6, (n, 1))    # shared per-subject leaning
    raw = level + attitude + rng.normal(0, 0.35, (n, items_n))
    return (np.clip(np.round(raw), 1, 5), np.ones(items_n, dtype=int))

categories = {
    "WTU": category(4.4, 3),
    "PU": category(4.4, 4),
    "PEOU": category(3.5, 5),
    "TRI": category(4.2, 2),
    "IND": category(4.0, 2),
    "GRAPH": category(4.1, 3),
}
report = tam_report(categories)
for name, entry in report["categories"].items():
    print(f"{name}: mean {entry['mean']:.2f} sd {entry['sd']:.2f} "
          f"alpha {entry['cronbach_alpha']}")
for model in report["regressions"]:
    terms = " + ".join(f"{c:.2f}*{p}" for c, p in
                       zip(model["coef"], model["predictors"]))
    print(f"{model['target']} = {terms}  (p-values: "
          f"{[round(p, 3) for p in model['p_values']]})")
