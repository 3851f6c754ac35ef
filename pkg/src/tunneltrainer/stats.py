"""Statistics toolkit for the study pipeline.

Covers the paired nonparametric comparison (Wilcoxon signed-rank with exact
small-n enumeration), a normality check (one-sample KS), usability scoring
(SUS), internal-consistency (Cronbach's alpha), Pearson correlation and
ordinary least squares with per-coefficient p-values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import stdtr

from .errors import (BadLength, DegenerateVariance, OutOfRange, RankDeficient,
                     TooFewPairs, TooFewSamples)

#: Largest n for which the signed-rank null distribution is enumerated
#: exactly; above it the normal approximation with continuity correction
#: (and tie correction) is used.
WILCOXON_EXACT_MAX_N = 12


def _normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def _rankdata(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        avg = 0.5 * (i + j) + 1.0
        ranks[order[i:j + 1]] = avg
        i = j + 1
    return ranks


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float      # signed: W+ - W-
    p_value: float
    n: int                # non-zero differences used
    w_plus: float
    w_minus: float
    method: str           # "exact" or "normal"


def wilcoxon_signed_rank(x, y) -> WilcoxonResult:
    """Two-sided paired signed-rank test of x vs y.

    Zero differences are dropped; tied absolute differences share average
    ranks. For n <= 12 the two-sided p comes from full enumeration of the
    2^n sign patterns, otherwise from the normal approximation with
    continuity and tie corrections.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length 1-D sequences")
    d = x - y
    d = d[d != 0.0]
    n = len(d)
    if n < 5:
        raise TooFewPairs(f"{n} non-zero differences, need >= 5")
    ranks = _rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    statistic = w_plus - w_minus

    if n <= WILCOXON_EXACT_MAX_N:
        sums = np.zeros(1)
        for r in ranks:
            sums = np.concatenate([sums, sums + r])
        total = len(sums)
        eps = 1e-9
        p_le = np.sum(sums <= w_plus + eps) / total
        p_ge = np.sum(sums >= w_plus - eps) / total
        p = min(1.0, 2.0 * min(p_le, p_ge))
        method = "exact"
    else:
        mean = n * (n + 1) / 4.0
        _, counts = np.unique(np.abs(d), return_counts=True)
        tie_term = float(np.sum(counts ** 3 - counts)) / 48.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
        if var <= 0:
            raise DegenerateVariance("all differences tied to zero variance")
        delta = w_plus - mean
        cc = 0.5 if delta > 0 else (-0.5 if delta < 0 else 0.0)
        z = (delta - cc) / math.sqrt(var)
        p = min(1.0, 2.0 * (1.0 - _normal_cdf(abs(z))))
        method = "normal"
    return WilcoxonResult(statistic, max(p, np.finfo(float).tiny), n,
                          w_plus, w_minus, method)


def ks_normality(sample, mean: float | None = None,
                 sd: float | None = None) -> tuple[float, float]:
    """One-sample Kolmogorov-Smirnov check against a normal distribution.

    Parameters default to the sample mean and sample SD (ddof=1); the
    returned p-value is the plain asymptotic Kolmogorov tail, so with
    estimated parameters it is approximate (no small-sample correction).
    """
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = len(x)
    if n < 5:
        raise TooFewSamples(f"{n} samples, need >= 5")
    if mean is None:
        mean = float(x.mean())
    if sd is None:
        sd = float(x.std(ddof=1))
    if sd <= 0:
        raise DegenerateVariance("sample standard deviation is zero")
    cdf = np.array([_normal_cdf((v - mean) / sd) for v in x])
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    d = float(max(upper.max(), lower.max()))
    lam = math.sqrt(n) * d
    p = _kolmogorov_tail(lam)
    return d, p


def _kolmogorov_tail(lam: float) -> float:
    """Q(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2)."""
    if lam <= 0:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-16:
            break
    return min(1.0, max(0.0, total))


def sus_score(answers) -> float:
    """System Usability Scale score (0..100) for ten 1..5 Likert answers.

    Odd items (1st, 3rd, ...) contribute (a - 1), even items (5 - a); the
    sum is scaled by 2.5. 100 is the best possible usability and 68 the
    customary acceptability threshold.
    """
    a = list(answers)
    if len(a) != 10:
        raise BadLength(f"SUS needs exactly 10 answers, got {len(a)}")
    total = 0.0
    for i, v in enumerate(a):
        fv = float(v)
        if not (1 <= fv <= 5):
            raise OutOfRange(f"answer {i + 1} = {v} outside 1..5")
        total += (fv - 1.0) if i % 2 == 0 else (5.0 - fv)
    return total * 2.5


def reverse_score(responses, polarity) -> np.ndarray:
    """Reverse-score negative Likert items (a -> 6 - a).

    *polarity* holds +1 for positively and -1 for negatively phrased items.
    """
    r = np.asarray(responses, dtype=np.float64)
    pol = np.asarray(polarity)
    if r.ndim != 2 or r.shape[1] != len(pol):
        raise ValueError("responses must be (subjects, items) matching polarity")
    out = r.copy()
    neg = pol < 0
    out[:, neg] = 6.0 - out[:, neg]
    return out


def cronbach_alpha(responses, polarity=None) -> float:
    """Cronbach's alpha over a (subjects, items) Likert matrix.

    Negative items are reverse-scored first; variances use the n-1
    denominator.
    """
    r = np.asarray(responses, dtype=np.float64)
    if r.ndim != 2:
        raise ValueError("responses must be a (subjects, items) matrix")
    n_subj, k = r.shape
    if k < 2 or n_subj < 2:
        raise TooFewSamples("need >= 2 items and >= 2 subjects")
    if polarity is not None:
        r = reverse_score(r, polarity)
    item_vars = r.var(axis=0, ddof=1)
    total_var = r.sum(axis=1).var(ddof=1)
    if total_var <= 0:
        raise DegenerateVariance("variance of subject totals is zero")
    return float(k / (k - 1.0) * (1.0 - item_vars.sum() / total_var))


def pearson(x, y) -> tuple[float, float]:
    """Pearson product-moment correlation and its two-sided t-test p-value."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length 1-D sequences")
    n = len(x)
    if n < 3:
        raise TooFewSamples(f"{n} pairs, need >= 3")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx <= 0 or syy <= 0:
        raise DegenerateVariance("zero variance in one of the variables")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if abs(r) >= 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * (1.0 - float(stdtr(n - 2, abs(t))))
    return r, p


@dataclass(frozen=True)
class OLSResult:
    coef: np.ndarray           # per-predictor coefficients
    p_values: np.ndarray       # per-predictor two-sided p
    stderr: np.ndarray
    intercept: float | None
    intercept_p: float | None
    r_squared: float
    residuals: np.ndarray
    df_resid: int


def ols_regression(X, y, intercept: bool = True) -> OLSResult:
    """Least squares fit with t-based per-coefficient p-values.

    Solved with the SVD-backed lstsq for numerical stability. Raises
    RankDeficient unless the (augmented) design matrix has full column rank
    and more rows than columns.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.shape != (n,):
        raise ValueError("y length must match X rows")
    design = np.column_stack([np.ones(n), X]) if intercept else X
    cols = design.shape[1]
    if n <= cols:
        raise RankDeficient(f"{n} rows for {cols} columns")
    if np.linalg.matrix_rank(design) < cols:
        raise RankDeficient("design matrix is rank deficient")

    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    rss = float(resid @ resid)
    df = n - cols
    sigma2 = rss / df
    cov = sigma2 * np.linalg.inv(design.T @ design)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        tvals = np.where(se > 0, beta / se, np.inf)
    pvals = 2.0 * (1.0 - stdtr(df, np.abs(tvals)))

    centered = y - y.mean() if intercept else y
    tss = float(centered @ centered)
    r2 = 1.0 - rss / tss if tss > 0 else 1.0

    if intercept:
        return OLSResult(coef=beta[1:], p_values=pvals[1:], stderr=se[1:],
                         intercept=float(beta[0]), intercept_p=float(pvals[0]),
                         r_squared=r2, residuals=resid, df_resid=df)
    return OLSResult(coef=beta, p_values=pvals, stderr=se, intercept=None,
                     intercept_p=None, r_squared=r2, residuals=resid, df_resid=df)


# -- questionnaire aggregation -------------------------------------------------

def category_scores(responses, polarity) -> np.ndarray:
    """Per-subject category score: mean of items after reverse-scoring."""
    return reverse_score(responses, polarity).mean(axis=1)


def tam_report(categories: dict[str, tuple[np.ndarray, np.ndarray]]) -> dict:
    """Aggregate a Technology Acceptance Model questionnaire.

    *categories* maps category name -> (responses matrix, polarity). Reports
    per-category means/SD/alpha, correlations of each category with WTU, and
    the two no-intercept regressions WTU ~ PU + PEOU and PU ~ TRI + IND +
    GRAPH (whichever of those categories are present).
    """
    scores: dict[str, np.ndarray] = {}
    report: dict = {"categories": {}}
    for name, (resp, pol) in categories.items():
        s = category_scores(resp, pol)
        scores[name] = s
        entry = {
            "mean": float(s.mean()),
            "sd": float(s.std(ddof=1)) if len(s) > 1 else 0.0,
            "n_items": int(np.asarray(resp).shape[1]),
        }
        try:
            entry["cronbach_alpha"] = cronbach_alpha(resp, pol)
        except (TooFewSamples, DegenerateVariance):
            entry["cronbach_alpha"] = None
        report["categories"][name] = entry

    if "WTU" in scores:
        corr = {}
        for name, s in scores.items():
            if name == "WTU":
                continue
            try:
                r, p = pearson(s, scores["WTU"])
                corr[name] = {"r": r, "p": p}
            except DegenerateVariance:
                corr[name] = {"r": None, "p": None}
        report["correlation_with_wtu"] = corr

    def fit(target: str, predictors: list[str]) -> dict | None:
        if target not in scores or not all(p in scores for p in predictors):
            return None
        X = np.column_stack([scores[p] for p in predictors])
        try:
            res = ols_regression(X, scores[target], intercept=False)
        except RankDeficient:
            return None
        return {
            "target": target,
            "predictors": predictors,
            "coef": [float(c) for c in res.coef],
            "p_values": [float(p) for p in res.p_values],
            "r_squared": res.r_squared,
        }

    models = []
    m1 = fit("WTU", ["PU", "PEOU"])
    if m1:
        models.append(m1)
    m2 = fit("PU", ["TRI", "IND", "GRAPH"])
    if m2:
        models.append(m2)
    if models:
        report["regressions"] = models
    return report
