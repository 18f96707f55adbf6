"""Hypothesis-driven sensitivity analysis for quality/complexity metrics.

Implements the statistical machinery (Welch's unequal-variance t-test with
Welch-Satterthwaite degrees of freedom, one-way ANOVA) with p-values built
on the regularized incomplete beta function, and on top of it the
hypothesis harness: condition-wise mean differences per metric, per-factor
verdicts, and a sensitivity ranking that selects the optimal metric.

Conventions: every mean difference is non-baseline minus baseline
(stirring - static, with soil - without, high - low density; for stirring
speed the pairs medium-low, high-low, high-medium). A quality metric
supports a hypothesis when its difference is significantly negative, a
complexity metric when significantly positive; the speed factor needs all
three pairwise differences sign-consistent plus a significant ANOVA.
Metric columns are min-max normalized over the analysis corpus before any
difference is taken, so magnitudes compare across metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import betainc

from .data import ConditionMetadata, Phase, StirSpeed, DensityClass
from .errors import ValidationError

DEFAULT_ALPHA = 0.05


class Polarity(str, Enum):
    QUALITY = "quality"      # hypothesis: score decreases under the condition
    COMPLEXITY = "complexity"  # hypothesis: score increases under the condition


class Factor(str, Enum):
    TEMPORAL = "temporal"
    STIR_SPEED = "stir_speed"
    SOIL = "soil"
    DENSITY = "density"


def t_two_sided_p(t: float, df: float) -> float:
    """Two-sided Student-t p-value via the regularized incomplete beta."""
    if df <= 0:
        raise ValidationError(f"degrees of freedom must be > 0, got {df}")
    if math.isinf(t):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def f_tail_p(f: float, df1: float, df2: float) -> float:
    """Upper-tail F-distribution probability via the incomplete beta."""
    if df1 <= 0 or df2 <= 0:
        raise ValidationError("degrees of freedom must be > 0")
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return float(betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f)))


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float
    degenerate: bool = False


@dataclass(frozen=True)
class AnovaResult:
    f: float
    df1: int
    df2: int
    p: float
    degenerate: bool = False


def welch_t_test(a, b) -> TTestResult:
    """Welch's unequal-variance two-sample t-test, two-sided.

    Degenerate variance handling: both groups constant with equal means
    gives t = 0, p = 1; constant groups with unequal means give p = 0 and a
    degenerate flag.
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.size < 2 or y.size < 2:
        raise ValidationError("welch_t_test needs at least 2 samples per group")
    vx = x.var(ddof=1)
    vy = y.var(ddof=1)
    dm = float(x.mean() - y.mean())
    if vx == 0.0 and vy == 0.0:
        if dm == 0.0:
            return TTestResult(t=0.0, df=float(x.size + y.size - 2), p=1.0, degenerate=True)
        return TTestResult(
            t=math.copysign(math.inf, dm),
            df=float(x.size + y.size - 2),
            p=0.0,
            degenerate=True,
        )
    se2 = vx / x.size + vy / y.size
    t = dm / math.sqrt(se2)
    df = se2**2 / (
        (vx / x.size) ** 2 / (x.size - 1) + (vy / y.size) ** 2 / (y.size - 1)
    )
    return TTestResult(t=float(t), df=float(df), p=t_two_sided_p(t, df))


def one_way_anova(groups) -> AnovaResult:
    """Classic one-way ANOVA: F = between-group MS over within-group MS."""
    gs = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(gs) < 2:
        raise ValidationError("one_way_anova needs at least 2 groups")
    if any(g.size < 2 for g in gs):
        raise ValidationError("every ANOVA group needs at least 2 samples")
    n = sum(g.size for g in gs)
    grand = np.concatenate(gs).mean()
    ss_between = sum(g.size * (g.mean() - grand) ** 2 for g in gs)
    ss_within = sum(((g - g.mean()) ** 2).sum() for g in gs)
    df1 = len(gs) - 1
    df2 = n - len(gs)
    if ss_within == 0.0:
        if ss_between == 0.0:
            return AnovaResult(f=0.0, df1=df1, df2=df2, p=1.0, degenerate=True)
        return AnovaResult(f=math.inf, df1=df1, df2=df2, p=0.0, degenerate=True)
    f = (ss_between / df1) / (ss_within / df2)
    return AnovaResult(f=float(f), df1=df1, df2=df2, p=f_tail_p(f, df1, df2))


@dataclass(frozen=True)
class ScoreRow:
    image_id: str
    metadata: ConditionMetadata
    scores: dict[str, float]


@dataclass(frozen=True)
class ScoreTable:
    """Per-image metric scores joined with capture metadata.

    Every declared metric must be present in every row; metric names are
    unique by construction of the dict columns.
    """

    rows: tuple[ScoreRow, ...]
    metrics: tuple[str, ...]

    def __post_init__(self) -> None:
        for row in self.rows:
            missing = [m for m in self.metrics if m not in row.scores]
            if missing:
                raise ValidationError(
                    f"image {row.image_id!r} is missing metric(s): {', '.join(missing)}"
                )

    def column(self, metric: str) -> np.ndarray:
        if metric not in self.metrics:
            raise ValidationError(f"unknown metric {metric!r}")
        return np.array([r.scores[metric] for r in self.rows], dtype=np.float64)

    def with_metric(self, name: str, values: dict[str, float]) -> "ScoreTable":
        """Join an additional metric column keyed by image id."""
        if name in self.metrics:
            raise ValidationError(f"metric {name!r} already present")
        rows = []
        for r in self.rows:
            if r.image_id not in values:
                raise ValidationError(f"metric {name!r} has no value for image {r.image_id!r}")
            scores = dict(r.scores)
            scores[name] = float(values[r.image_id])
            rows.append(ScoreRow(r.image_id, r.metadata, scores))
        return ScoreTable(rows=tuple(rows), metrics=self.metrics + (name,))


@dataclass(frozen=True)
class HypothesisRow:
    metric: str
    factor: Factor
    mean_diffs: tuple[tuple[str, float], ...]
    p_value: float
    supported: bool
    test: str  # "welch_t" or "anova"


def _metric_column(table: ScoreTable, metric: str, normalize: bool) -> np.ndarray:
    col = table.column(metric)
    if not np.all(np.isfinite(col)):
        raise ValidationError(f"metric {metric!r} has non-finite values")
    if not normalize:
        return col
    span = col.max() - col.min()
    if span == 0.0:
        return np.zeros_like(col)
    return (col - col.min()) / span


def _split(values: np.ndarray, mask: np.ndarray, label: str, factor: Factor) -> np.ndarray:
    subset = values[mask]
    if subset.size < 2:
        raise ValidationError(
            f"factor {factor.value!r}: condition level {label!r} has fewer than 2 rows"
        )
    return subset


def evaluate_hypotheses(
    table: ScoreTable,
    metric: str,
    polarity: Polarity,
    alpha: float = DEFAULT_ALPHA,
    normalize: bool = True,
) -> list[HypothesisRow]:
    """Mean differences, p-values, and verdicts for all four factors.

    Row selection: the temporal factor compares static-phase rows against
    stirring-phase rows; stirring speed groups stirring-phase rows by their
    speed; soil and density split the full corpus by their flag/class.
    Columns are min-max scaled over the table first unless normalize is
    off; verdicts are identical either way since the tests are
    scale-invariant.
    """
    values = _metric_column(table, metric, normalize)
    meta = [r.metadata for r in table.rows]
    rows: list[HypothesisRow] = []

    def supported_sign(diff: float) -> bool:
        return diff < 0 if polarity is Polarity.QUALITY else diff > 0

    # Temporal: stirring minus static.
    static = _split(values, np.array([m.phase is Phase.STATIC for m in meta]), "static", Factor.TEMPORAL)
    stirring = _split(
        values, np.array([m.phase is Phase.STIRRING for m in meta]), "stirring", Factor.TEMPORAL
    )
    diff = float(stirring.mean() - static.mean())
    res = welch_t_test(stirring, static)
    rows.append(
        HypothesisRow(
            metric=metric,
            factor=Factor.TEMPORAL,
            mean_diffs=(("Stir_Static", diff),),
            p_value=res.p,
            supported=bool(res.p < alpha and supported_sign(diff)),
            test="welch_t",
        )
    )

    # Stirring speed: three pairwise differences plus one ANOVA p-value.
    speed_groups = {}
    for speed in (StirSpeed.LOW, StirSpeed.MEDIUM, StirSpeed.HIGH):
        mask = np.array(
            [m.phase is Phase.STIRRING and m.stir_speed is speed for m in meta]
        )
        speed_groups[speed] = _split(values, mask, speed.value, Factor.STIR_SPEED)
    low, med, high = (
        speed_groups[StirSpeed.LOW],
        speed_groups[StirSpeed.MEDIUM],
        speed_groups[StirSpeed.HIGH],
    )
    diffs = (
        ("Med_Low", float(med.mean() - low.mean())),
        ("High_Low", float(high.mean() - low.mean())),
        ("High_Med", float(high.mean() - med.mean())),
    )
    anova = one_way_anova([low, med, high])
    monotone = all(supported_sign(d) for _, d in diffs)
    rows.append(
        HypothesisRow(
            metric=metric,
            factor=Factor.STIR_SPEED,
            mean_diffs=diffs,
            p_value=anova.p,
            supported=bool(anova.p < alpha and monotone),
            test="anova",
        )
    )

    # Soil: with soil minus without.
    with_soil = _split(values, np.array([m.soil for m in meta]), "soil", Factor.SOIL)
    without = _split(values, np.array([not m.soil for m in meta]), "no soil", Factor.SOIL)
    diff = float(with_soil.mean() - without.mean())
    res = welch_t_test(with_soil, without)
    rows.append(
        HypothesisRow(
            metric=metric,
            factor=Factor.SOIL,
            mean_diffs=(("Soil_NoSoil", diff),),
            p_value=res.p,
            supported=bool(res.p < alpha and supported_sign(diff)),
            test="welch_t",
        )
    )

    # Density: high class minus low class.
    high_d = _split(
        values,
        np.array([m.density_class is DensityClass.HIGH for m in meta]),
        "high",
        Factor.DENSITY,
    )
    low_d = _split(
        values,
        np.array([m.density_class is DensityClass.LOW for m in meta]),
        "low",
        Factor.DENSITY,
    )
    diff = float(high_d.mean() - low_d.mean())
    res = welch_t_test(high_d, low_d)
    rows.append(
        HypothesisRow(
            metric=metric,
            factor=Factor.DENSITY,
            mean_diffs=(("High_Low", diff),),
            p_value=res.p,
            supported=bool(res.p < alpha and supported_sign(diff)),
            test="welch_t",
        )
    )
    return rows


@dataclass(frozen=True)
class MetricRanking:
    metric: str
    supported_count: int
    support_magnitude: float
    supported_factors: tuple[str, ...]
    rationale: str


def select_optimal(rows_by_metric: dict[str, list[HypothesisRow]]) -> list[MetricRanking]:
    """Rank metrics by supported-hypothesis count, then summed |Mean_Diff|.

    The magnitude tiebreaker sums absolute differences over supported rows
    only; remaining ties break lexicographically by metric name. The first
    entry is the selected metric.
    """
    if not rows_by_metric:
        raise ValidationError("select_optimal needs at least one metric")
    rankings = []
    for name in sorted(rows_by_metric):
        rows = rows_by_metric[name]
        supported = [r for r in rows if r.supported]
        magnitude = float(sum(abs(d) for r in supported for _, d in r.mean_diffs))
        factors = tuple(r.factor.value for r in supported)
        rationale = (
            f"{name}: supports {len(supported)} hypothesis(es)"
            f" [{', '.join(factors) if factors else 'none'}],"
            f" summed |Mean_Diff| {magnitude:.4f}"
        )
        rankings.append(
            MetricRanking(
                metric=name,
                supported_count=len(supported),
                support_magnitude=magnitude,
                supported_factors=factors,
                rationale=rationale,
            )
        )
    rankings.sort(key=lambda r: (-r.supported_count, -r.support_magnitude, r.metric))
    return rankings
