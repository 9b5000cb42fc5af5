"""Two-sample accessibility differentials with multiple-testing control.

One t-test per cell (weekday vs weekend samples, typically), then a
joint adjustment of the raw p-values across all cells.  Family-wise
corrections (bonferroni, holm, hochberg) bound the chance of any false
rejection; benjamini-hochberg bounds the expected share of false
rejections, which keeps more cells on the map in exploratory use.

p-values come from the Student t CDF evaluated through the regularized
incomplete beta function (scipy.special.stdtr, relative accuracy well
below 1e-10).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import stdtr

from .validation import as_float_array, readonly

VARIANTS = ("welch", "student_pooled")
TAILS = ("two_sided", "a_greater", "b_greater")
ADJUST_METHODS = ("none", "bonferroni", "holm", "hochberg", "bh")


@dataclass(frozen=True)
class SamplePair:
    """Two sample groups for one cell (e.g. weekday vs weekend values)."""

    cell_id: str
    group_a: np.ndarray
    group_b: np.ndarray

    def __post_init__(self):
        a = as_float_array(self.group_a, f"{self.cell_id}: group_a", ndim=1)
        b = as_float_array(self.group_b, f"{self.cell_id}: group_b", ndim=1)
        object.__setattr__(self, "group_a", readonly(a))
        object.__setattr__(self, "group_b", readonly(b))


@dataclass(frozen=True)
class TestResult:
    statistic: float
    df: float
    p_value: float


def _tail_p(t: float, df: float, tail: str) -> float:
    if tail == "two_sided":
        return float(2.0 * stdtr(df, -abs(t)))
    if tail == "a_greater":  # H1: mean(a) > mean(b)
        return float(stdtr(df, -t))
    if tail == "b_greater":  # H1: mean(b) > mean(a)
        return float(stdtr(df, t))
    raise ValueError(f"tail must be one of {TAILS}, got {tail!r}")


def t_test(
    a: np.ndarray,
    b: np.ndarray,
    variant: str = "welch",
    tail: str = "two_sided",
) -> TestResult:
    """Two-sample t-test of mean(a) vs mean(b).

    ``welch`` uses per-group variances with Satterthwaite degrees of
    freedom; ``student_pooled`` pools them with n_a + n_b - 2 degrees.
    Two identical constant groups are a defined no-difference outcome
    (t=0, p=1), not an error.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if tail not in TAILS:
        raise ValueError(f"tail must be one of {TAILS}, got {tail!r}")
    av = as_float_array(a, "a", ndim=1)
    bv = as_float_array(b, "b", ndim=1)
    n_a, n_b = av.shape[0], bv.shape[0]
    if n_a < 2 or n_b < 2:
        raise ValueError(f"each group needs at least 2 observations, got {n_a} and {n_b}")

    mean_a, mean_b = float(av.mean()), float(bv.mean())
    var_a = float(av.var(ddof=1))
    var_b = float(bv.var(ddof=1))

    if variant == "student_pooled":
        df = float(n_a + n_b - 2)
        pooled = ((n_a - 1) * var_a + (n_b - 1) * var_b) / df
        se = math.sqrt(pooled * (1.0 / n_a + 1.0 / n_b))
    else:
        q_a, q_b = var_a / n_a, var_b / n_b
        se = math.sqrt(q_a + q_b)
        if se > 0:
            df = (q_a + q_b) ** 2 / (q_a**2 / (n_a - 1) + q_b**2 / (n_b - 1))
        else:
            df = float(n_a + n_b - 2)

    if se == 0.0:
        # Both groups constant. Equal means: no evidence of difference.
        # Unequal means: the difference is exact, p -> 0 in the favoured tail.
        if mean_a == mean_b:
            return TestResult(statistic=0.0, df=df, p_value=1.0)
        t = math.inf if mean_a > mean_b else -math.inf
        if tail == "two_sided":
            p = 0.0
        elif tail == "a_greater":
            p = 0.0 if t > 0 else 1.0
        else:
            p = 0.0 if t < 0 else 1.0
        return TestResult(statistic=t, df=df, p_value=p)

    t = (mean_a - mean_b) / se
    return TestResult(statistic=float(t), df=float(df), p_value=_tail_p(t, df, tail))


def adjust(
    pvalues: np.ndarray,
    method: str = "bh",
    alpha: float = 0.05,
) -> tuple[np.ndarray, np.ndarray]:
    """Adjusted p-values and rejection flags for one correction method.

    bonferroni scales every p by the family size; holm steps down and
    hochberg steps up through the ordered p-values with the same
    per-rank thresholds; bh steps up with rank-proportional thresholds
    to control the false discovery rate.  Rejection means adjusted
    p <= alpha.  Ties are ordered stably by (p, original index).
    """
    if method not in ADJUST_METHODS:
        raise ValueError(f"method must be one of {ADJUST_METHODS}, got {method!r}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    p = as_float_array(pvalues, "pvalues", ndim=1)
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.shape[0]
    if m == 0:
        return p.copy(), np.zeros(0, dtype=bool)

    if method == "none":
        adjusted = p.copy()
    elif method == "bonferroni":
        adjusted = np.minimum(1.0, m * p)
    else:
        order = np.argsort(p, kind="stable")
        ranked = p[order]
        ranks = np.arange(1, m + 1, dtype=np.float64)
        if method == "holm":
            stepped = np.maximum.accumulate((m - ranks + 1) * ranked)
        elif method == "hochberg":
            stepped = np.minimum.accumulate(((m - ranks + 1) * ranked)[::-1])[::-1]
        else:  # bh
            stepped = np.minimum.accumulate((m / ranks * ranked)[::-1])[::-1]
        stepped = np.minimum(1.0, stepped)
        adjusted = np.empty_like(p)
        adjusted[order] = stepped

    return adjusted, adjusted <= alpha


@dataclass(frozen=True)
class DifferentialReport:
    """Per-cell test results with per-method adjusted decisions."""

    cell_ids: tuple[str, ...]
    statistic: np.ndarray
    df: np.ndarray
    p_value: np.ndarray
    adjusted: Mapping[str, np.ndarray]
    rejected: Mapping[str, np.ndarray]
    m: int
    alpha: float
    variant: str
    tail: str
    skipped: tuple[tuple[str, str], ...] = ()  # (cell_id, reason)

    def __post_init__(self):
        readonly(self.statistic)
        readonly(self.df)
        readonly(self.p_value)
        for arr in self.adjusted.values():
            readonly(arr)
        for arr in self.rejected.values():
            readonly(arr)

    def rejection_counts(self) -> dict[str, int]:
        return {method: int(flags.sum()) for method, flags in self.rejected.items()}


def differential_report(
    samples: Sequence[SamplePair],
    variant: str = "welch",
    tail: str = "two_sided",
    alpha: float = 0.05,
) -> DifferentialReport:
    """Run one t-test per cell, then adjust jointly across all testable cells.

    Cells whose samples cannot support a test (fewer than 2 observations
    in a group) are reported as skipped and excluded from the family
    size m.
    """
    if not samples:
        raise ValueError("at least one sample pair is required")
    cell_ids: list[str] = []
    stats: list[float] = []
    dfs: list[float] = []
    pvals: list[float] = []
    skipped: list[tuple[str, str]] = []
    for pair in samples:
        try:
            result = t_test(pair.group_a, pair.group_b, variant=variant, tail=tail)
        except ValueError as exc:
            skipped.append((pair.cell_id, str(exc)))
            continue
        cell_ids.append(pair.cell_id)
        stats.append(result.statistic)
        dfs.append(result.df)
        pvals.append(result.p_value)

    p = np.array(pvals, dtype=np.float64)
    adjusted: dict[str, np.ndarray] = {}
    rejected: dict[str, np.ndarray] = {}
    for method in ADJUST_METHODS:
        adj, rej = adjust(p, method=method, alpha=alpha)
        adjusted[method] = adj
        rejected[method] = rej

    return DifferentialReport(
        cell_ids=tuple(cell_ids),
        statistic=np.array(stats, dtype=np.float64),
        df=np.array(dfs, dtype=np.float64),
        p_value=p,
        adjusted=adjusted,
        rejected=rejected,
        m=len(cell_ids),
        alpha=alpha,
        variant=variant,
        tail=tail,
        skipped=tuple(skipped),
    )
