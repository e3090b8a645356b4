"""Evaluation statistics over exported records.

Implements exactly what the evaluation needs: sample descriptives, the
pooled-variance independent-groups Student t-test (pooled, not Welch, so
df = n1 + n2 - 2), usability-score summaries by group, and a demographics
table. Inputs are the stringly-typed rows of the CSV export.

The 0.05 two-tailed critical value is computed in-repo: the two-tailed tail
probability of Student's t is the regularized incomplete beta
I_x(df/2, 1/2) with x = df/(df + t^2), evaluated with a Lentz-style
continued fraction; the critical value is found by bisection on t. This
gives ~1e-9 accuracy (unit tests pin df=51 -> 2.008 among others), far
beyond the 3-decimal display precision used in reports.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from math import exp, lgamma, log, log1p, sqrt
from typing import Iterable, Mapping, Sequence

from . import scoring

SUS_COLUMNS = tuple(f"Inter_odp_{i}" for i in range(1, 11))

# export column -> report field
DEMOGRAPHIC_FIELDS = {
    "nationality": "Locale",
    "country_of_birth": "Hometown",
    "gender": "Gender",
    "device": "Device",
    "immigrant": "Immigrant",
}

_IMMIGRANT_LABELS = {"1": "yes", "0": "no"}

NO_DATA = "No data"


class AnalyticsError(Exception):
    """code is TOO_FEW (not enough observations) or BAD_GROUP."""

    def __init__(self, code: str, message: str) -> None:
        self.code = code
        super().__init__(f"{code}: {message}")


@dataclass(frozen=True)
class GroupStats:
    """Sample size, mean, and sample SD (n-1 denominator; None when n < 2)."""

    n: int
    mean: float
    sd: float | None


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    significant_at_05: bool


def descriptive(values: Sequence[float]) -> GroupStats:
    """Mean and sample standard deviation; requires at least two values."""
    if len(values) < 2:
        raise AnalyticsError("TOO_FEW", f"need >= 2 values, got {len(values)}")
    return GroupStats(
        n=len(values),
        mean=statistics.fmean(values),
        sd=statistics.stdev(values),
    )


def student_t_independent(a: GroupStats, b: GroupStats) -> TTestResult:
    """Pooled-variance Student t for independent groups."""
    if a.n < 2 or b.n < 2:
        raise AnalyticsError("TOO_FEW", "both groups need n >= 2")
    if a.sd is None or b.sd is None:
        raise AnalyticsError("TOO_FEW", "both groups need a defined SD")
    df = a.n + b.n - 2
    pooled_variance = ((a.n - 1) * a.sd**2 + (b.n - 1) * b.sd**2) / df
    denominator = sqrt(pooled_variance) * sqrt(1 / a.n + 1 / b.n)
    if denominator == 0.0:
        t = 0.0 if a.mean == b.mean else float("inf") if a.mean > b.mean else float("-inf")
    else:
        t = (a.mean - b.mean) / denominator
    return TTestResult(t=t, df=df, significant_at_05=abs(t) > t_critical_two_tailed(df))


def student_t_from_raw(a_values: Sequence[float], b_values: Sequence[float]) -> TTestResult:
    """Same test computed from raw observations via sums of squared deviations.

    Deliberately does not reuse descriptive()/student_t_independent()
    arithmetic, so the two paths can cross-check each other.
    """
    n1, n2 = len(a_values), len(b_values)
    if n1 < 2 or n2 < 2:
        raise AnalyticsError("TOO_FEW", "both groups need n >= 2")
    mean1 = sum(a_values) / n1
    mean2 = sum(b_values) / n2
    ss1 = sum((x - mean1) ** 2 for x in a_values)
    ss2 = sum((x - mean2) ** 2 for x in b_values)
    df = n1 + n2 - 2
    pooled_variance = (ss1 + ss2) / df
    denominator = sqrt(pooled_variance * (1 / n1 + 1 / n2))
    if denominator == 0.0:
        t = 0.0 if mean1 == mean2 else float("inf") if mean1 > mean2 else float("-inf")
    else:
        t = (mean1 - mean2) / denominator
    return TTestResult(t=t, df=df, significant_at_05=abs(t) > t_critical_two_tailed(df))


# ---- Student t critical value -------------------------------------------


def _log_beta(a: float, b: float) -> float:
    return lgamma(a) + lgamma(b) - lgamma(a + b)


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # modified Lentz iteration; converges in a few dozen terms for our range
    max_iterations, eps, tiny = 300, 3e-14, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iterations + 1):
        m2 = 2 * m
        numerator = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        numerator = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = a * log(x) + b * log1p(-x) - _log_beta(a, b)
    front = exp(log_front)
    # use the representation that converges fastest
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def t_two_tailed_p(t: float, df: int) -> float:
    """P(|T| >= t) for Student's t with df degrees of freedom."""
    if df < 1:
        raise AnalyticsError("TOO_FEW", f"df must be >= 1, got {df}")
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def t_critical_two_tailed(df: int, alpha: float = 0.05) -> float:
    """The t where the two-tailed tail probability equals alpha."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    low, high = 0.0, 1000.0
    for _ in range(200):
        mid = (low + high) / 2.0
        if t_two_tailed_p(mid, df) > alpha:
            low = mid
        else:
            high = mid
    return (low + high) / 2.0


# ---- record-level summaries -----------------------------------------------


def sus_score_of(record: Mapping[str, str]) -> float | None:
    """Usability score for one export row, None when answers are incomplete."""
    answers = []
    for column in SUS_COLUMNS:
        cell = (record.get(column) or "").strip()
        if not cell:
            return None
        answers.append(int(cell))
    return scoring.score_sus(answers).score


@dataclass(frozen=True)
class SusGroupRow:
    group: str
    stats: GroupStats
    above_benchmark: bool


def sus_summary(
    records: Iterable[Mapping[str, str]], group_key: str
) -> list[SusGroupRow]:
    """Usability scores grouped by device or immigrant flag."""
    if group_key not in ("device", "immigrant"):
        raise AnalyticsError("BAD_GROUP", f"unsupported group key {group_key!r}")
    column = DEMOGRAPHIC_FIELDS[group_key]
    grouped: dict[str, list[float]] = {}
    for record in records:
        score = sus_score_of(record)
        if score is None:
            continue
        label = (record.get(column) or "").strip()
        if not label:
            continue
        if group_key == "immigrant":
            label = _IMMIGRANT_LABELS.get(label, label)
        grouped.setdefault(label, []).append(score)
    rows = []
    for label in sorted(grouped):
        scores = grouped[label]
        stats = GroupStats(
            n=len(scores),
            mean=statistics.fmean(scores),
            sd=statistics.stdev(scores) if len(scores) >= 2 else None,
        )
        rows.append(
            SusGroupRow(
                group=label,
                stats=stats,
                above_benchmark=stats.mean > scoring.SUS_BENCHMARK,
            )
        )
    return rows


@dataclass(frozen=True)
class CategoryCount:
    category: str
    count: int
    percent: float  # of all records, one decimal


def demographics_table(
    records: Sequence[Mapping[str, str]]
) -> dict[str, list[CategoryCount]]:
    """Counts and percentages per demographic field; nulls become "No data"."""
    total = len(records)
    table: dict[str, list[CategoryCount]] = {}
    for field, column in DEMOGRAPHIC_FIELDS.items():
        counts: dict[str, int] = {}
        for record in records:
            label = (record.get(column) or "").strip()
            if field == "immigrant" and label:
                label = _IMMIGRANT_LABELS.get(label, label)
            counts[label or NO_DATA] = counts.get(label or NO_DATA, 0) + 1
        rows = [
            CategoryCount(
                category=category,
                count=count,
                percent=round(100.0 * count / total, 1) if total else 0.0,
            )
            for category, count in counts.items()
        ]
        # biggest groups first, "No data" pinned last
        rows.sort(key=lambda row: (row.category == NO_DATA, -row.count, row.category))
        table[field] = rows
    return table


# ---- report rendering ---------------------------------------------------


def _format_stats(stats: GroupStats) -> str:
    sd = f"{stats.sd:.2f}" if stats.sd is not None else "-"
    return f"n={stats.n} M={stats.mean:.2f} SD={sd}"


def render_text_report(records: Sequence[Mapping[str, str]]) -> str:
    """Aligned plain-text evaluation report over export rows."""
    lines = [f"Records: {len(records)}", ""]
    scores = [s for s in (sus_score_of(r) for r in records) if s is not None]
    if len(scores) >= 2:
        stats = descriptive(scores)
        flag = "above" if stats.mean > scoring.SUS_BENCHMARK else "below"
        lines.append(
            f"SUS overall: {_format_stats(stats)} ({flag} benchmark {scoring.SUS_BENCHMARK:g})"
        )
    for group_key in ("device", "immigrant"):
        rows = sus_summary(records, group_key)
        if not rows:
            continue
        lines.append(f"SUS by {group_key}:")
        width = max(len(row.group) for row in rows)
        for row in rows:
            flag = "above" if row.above_benchmark else "below"
            lines.append(
                f"  {row.group.ljust(width)}  {_format_stats(row.stats)} ({flag} benchmark)"
            )
        if len(rows) == 2 and all(row.stats.n >= 2 for row in rows):
            result = student_t_independent(rows[0].stats, rows[1].stats)
            verdict = "significant" if result.significant_at_05 else "not significant"
            lines.append(
                f"  t({result.df}) = {result.t:.3f}, {verdict} at 0.05 (two-tailed)"
            )
        lines.append("")
    lines.append("Demographics:")
    table = demographics_table(records)
    for field, rows in table.items():
        lines.append(f"  {field}:")
        width = max((len(row.category) for row in rows), default=0)
        for row in rows:
            lines.append(
                f"    {row.category.ljust(width)}  {str(row.count).rjust(4)}  {row.percent:5.1f}%"
            )
    return "\n".join(lines) + "\n"


def render_csv_report(records: Sequence[Mapping[str, str]]) -> str:
    """Machine-readable demographics + SUS summary, one row per figure."""
    lines = ["section,field,category,n,mean,sd,percent,above_benchmark"]
    for group_key in ("device", "immigrant"):
        for row in sus_summary(records, group_key):
            sd = f"{row.stats.sd:.4f}" if row.stats.sd is not None else ""
            lines.append(
                f"sus,{group_key},{row.group},{row.stats.n},{row.stats.mean:.4f},{sd},,"
                f"{'yes' if row.above_benchmark else 'no'}"
            )
    for field, rows in demographics_table(records).items():
        for row in rows:
            lines.append(
                f"demographics,{field},{row.category},{row.count},,,{row.percent:.1f},"
            )
    return "\n".join(lines) + "\n"
