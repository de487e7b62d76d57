"""
Significance tests and ensemble-comparison diagnostics over AUC reports.

All t-tests are one-sided (alternative: the first mean is larger) and
follow Student: a one-sample test for paired differences, a pooled
variance test for two independent samples.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import betainc

from combiner_app.combiners import IRT
from scoring_app.domain import ScoreMatrix
from scoring_app.exceptions import InputError
from synth_app.generators import rng_for

from .report import ExperimentReport, method_rank, ordered_methods

logger = logging.getLogger(__name__)

SIGNIFICANCE_LEVEL = 0.05
CORRELATION_THRESHOLDS = (0.7, 0.8, 0.9)

BY_DATASET = 'dataset'
BY_SOURCE = 'source'

LOW_COR = 'Low_Cor'
HIGH_COR = 'High_Cor'
ALL = 'All'

_FALSE_POSITIVE_STREAM = 98


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    df: int

    def __iter__(self):
        return iter((self.t, self.p))


def t_sf(t: float, df: float) -> float:
    """Upper tail P(T > t) of Student's t with df degrees of freedom."""
    if df <= 0:
        raise InputError(f"Degrees of freedom must be positive, got {df}.")
    if np.isinf(t):
        return 0.0 if t > 0 else 1.0
    tail = 0.5 * float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return tail if t >= 0 else 1.0 - tail


def _t_result(difference: float, standard_error: float, df: int) -> TTestResult:
    if standard_error == 0.0:
        if difference == 0.0:
            return TTestResult(0.0, 0.5, df)
        raise InputError(
            "Zero variance with a non-zero mean difference; the t statistic is undefined."
        )
    t = difference / standard_error
    return TTestResult(float(t), t_sf(t, df), df)


def t_test_paired_diff(diffs) -> TTestResult:
    """One-sample test of mean(diffs) > 0."""
    diffs = np.asarray(diffs, dtype=np.float64).reshape(-1)
    n = diffs.size
    if n < 2:
        raise InputError(f"A paired t-test needs at least 2 differences, got {n}.")
    return _t_result(diffs.mean(), diffs.std(ddof=1) / np.sqrt(n), n - 1)


def t_test_two_sample(a, b) -> TTestResult:
    """Pooled-variance test of mean(a) > mean(b)."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    na, nb = a.size, b.size
    if na < 1 or nb < 1 or na + nb < 3:
        raise InputError(f"A two-sample t-test needs n_a + n_b >= 3, got {na} and {nb}.")
    df = na + nb - 2
    pooled = (((a - a.mean()) ** 2).sum() + ((b - b.mean()) ** 2).sum()) / df
    return _t_result(a.mean() - b.mean(), np.sqrt(pooled * (1.0 / na + 1.0 / nb)), df)


def _top2(means: pd.Series) -> Tuple[str, str]:
    ranked = sorted(means.index, key=lambda m: (-means[m], method_rank(m), m))
    return ranked[0], ranked[1]


def _guarded(test, *samples) -> TTestResult:
    try:
        return test(*samples)
    except InputError as exc:
        logger.warning("t-test skipped: %s", exc)
        return TTestResult(float('nan'), float('nan'), 0)


def top2_significance(
    report: ExperimentReport,
    group_key: str = BY_SOURCE,
    alpha: float = SIGNIFICANCE_LEVEL,
    paired: bool = False,
) -> pd.DataFrame:
    """
    For every group, test whether the method with the best mean AUC beats
    the runner-up. Mean ties are broken by the fixed method order.

    The default is the pooled two-sample test; ``paired`` tests the
    per-dataset differences instead.
    """
    rows = []
    for group, part in report.frame.groupby(group_key, sort=True):
        table = ExperimentReport(part).pivot()
        if table.shape[1] < 2:
            continue
        best, second = _top2(table.mean(axis=0))
        if paired:
            result = _guarded(t_test_paired_diff, table[best] - table[second])
        else:
            result = _guarded(t_test_two_sample, table[best], table[second])
        rows.append(
            {
                group_key: group,
                'best': best,
                'second': second,
                'mean_best': float(table[best].mean()),
                'mean_second': float(table[second].mean()),
                't': result.t,
                'p': result.p,
                'significant': bool(result.p < alpha),
            }
        )
    columns = [group_key, 'best', 'second', 'mean_best', 'mean_second', 't', 'p', 'significant']
    return pd.DataFrame(rows, columns=columns)


def top2_differences(report: ExperimentReport, group_key: str = BY_SOURCE) -> Dict[str, np.ndarray]:
    """Per-dataset AUC differences between each group's two best methods."""
    differences = {}
    for group, part in report.frame.groupby(group_key, sort=True):
        table = ExperimentReport(part).pivot()
        if table.shape[1] < 2:
            continue
        best, second = _top2(table.mean(axis=0))
        differences[group] = (table[best] - table[second]).to_numpy()
    return differences


def count_false_positives(draws: np.ndarray, alpha: float = SIGNIFICANCE_LEVEL) -> int:
    """
    Spurious top-2 significances in one simulated collection.

    ``draws`` is sources x datasets x methods, all from one distribution.
    """
    n_sources, n_datasets, n_methods = draws.shape
    if n_methods < 2:
        return 0
    means = draws.mean(axis=1)
    # stable order keeps the lower method index on ties
    order = np.argsort(-means, axis=1, kind='stable')
    rows = np.arange(n_sources)
    best = draws[rows, :, order[:, 0]]
    second = draws[rows, :, order[:, 1]]
    df = 2 * n_datasets - 2
    ss = ((best - best.mean(axis=1, keepdims=True)) ** 2).sum(axis=1) + (
        (second - second.mean(axis=1, keepdims=True)) ** 2
    ).sum(axis=1)
    se = np.sqrt(ss / df * (2.0 / n_datasets))
    t = (best.mean(axis=1) - second.mean(axis=1)) / se
    tail = 0.5 * betainc(df / 2.0, 0.5, df / (df + t * t))
    p = np.where(t >= 0, tail, 1.0 - tail)
    return int((p < alpha).sum())


@dataclass(frozen=True)
class FalsePositiveSummary:
    counts: Tuple[int, ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.counts))

    @property
    def sd(self) -> float:
        return float(np.std(self.counts, ddof=1)) if len(self.counts) > 1 else 0.0


def false_positive_simulation(
    n_sources: int = 1190,
    n_datasets: int = 100,
    n_methods: int = 7,
    reps: int = 30,
    seed: int = 0,
    alpha: float = SIGNIFICANCE_LEVEL,
) -> FalsePositiveSummary:
    """
    Calibrate the top-2 test: every method draws its AUC stand-ins from
    N(0, 1), so any significant source is a false positive.
    """
    if min(n_sources, n_methods, reps) < 1 or n_datasets < 2:
        raise InputError("Sources, methods and reps must be at least 1, datasets at least 2.")
    counts = []
    for rep in range(reps):
        rng = rng_for(seed, _FALSE_POSITIVE_STREAM, rep)
        draws = rng.standard_normal((n_sources, n_datasets, n_methods))
        counts.append(count_false_positives(draws, alpha))
        logger.debug(
            "False-positive replicate %d: %d of %d sources", rep + 1, counts[-1], n_sources
        )
    summary = FalsePositiveSummary(counts=tuple(counts))
    logger.info(
        "False positives over %d replicates: mean %.2f, SD %.2f",
        reps, summary.mean, summary.sd,
    )
    return summary


def correlation_counts(
    m: ScoreMatrix, thresholds: Sequence[float] = CORRELATION_THRESHOLDS
) -> Tuple[int, ...]:
    """
    Off-diagonal entries of the detector correlation matrix strictly above
    each threshold. Both halves of the symmetric matrix are counted.
    """
    scores = m.scores
    n = scores.shape[1]
    with np.errstate(divide='ignore', invalid='ignore'):
        corr = np.corrcoef(scores, rowvar=False) if n > 1 else np.ones((1, 1))
    corr = np.nan_to_num(np.atleast_2d(corr), nan=0.0)
    np.fill_diagonal(corr, 1.0)
    return tuple(int((corr > threshold).sum()) - n for threshold in thresholds)


def best_ensemble_proportions(report: ExperimentReport, by: str = BY_DATASET) -> pd.Series:
    """
    Share of datasets (or sources) on which each method has the highest
    AUC. Per source, AUCs are averaged over the source's datasets first.
    Ties go to the method earlier in the fixed order.
    """
    if by not in (BY_DATASET, BY_SOURCE):
        raise InputError(f"Proportions are taken by '{BY_DATASET}' or '{BY_SOURCE}', not '{by}'.")
    methods = report.methods
    if len(report) == 0:
        return pd.Series(0.0, index=methods, name='proportion')
    table = report.pivot()
    if by == BY_SOURCE:
        sources = report.frame.drop_duplicates('dataset').set_index('dataset')['source']
        table = table.groupby(sources.loc[table.index].to_numpy(), sort=True).mean()
    winners = [_top_method(row) for _, row in table.iterrows()]
    counts = pd.Series(winners).value_counts()
    return pd.Series(
        [counts.get(m, 0) / len(winners) for m in methods], index=methods, name='proportion'
    )


def _top_method(row: pd.Series) -> str:
    row = row.dropna()
    return min(row.index, key=lambda m: (-row[m], method_rank(m), m))


def correlation_split(
    report: ExperimentReport, cor70_by_dataset: Mapping[str, int]
) -> pd.DataFrame:
    """
    Best-ensemble proportions for datasets whose detectors never correlate
    above 0.7 (Low_Cor), for the rest (High_Cor), and overall.
    """
    datasets = report.frame['dataset'].unique()
    unknown = [d for d in datasets if d not in cor70_by_dataset]
    if unknown:
        raise InputError(f"No Cor70 count for datasets {unknown[:3]}.")
    low = [d for d in datasets if cor70_by_dataset[d] == 0]
    high = [d for d in datasets if cor70_by_dataset[d] > 0]
    frame = report.frame
    rows = {}
    for label, members in ((LOW_COR, low), (HIGH_COR, high), (ALL, list(datasets))):
        part = ExperimentReport(frame[frame['dataset'].isin(members)])
        rows[label] = best_ensemble_proportions(part).reindex(report.methods, fill_value=0.0)
        rows[label]['n_datasets'] = len(members)
    table = pd.DataFrame(rows).T
    table['n_datasets'] = table['n_datasets'].astype(int)
    return table


def paired_tests_vs(
    report: ExperimentReport, reference: str = IRT, per_iteration: bool = False
) -> pd.DataFrame:
    """
    Reference AUC minus each rival's AUC, cell by cell, with a one-sided
    paired t-test. Differences are reported in percent.

    Pooled over all iterations and repetitions of an experiment by default;
    ``per_iteration`` tests every iteration separately.
    """
    if reference not in report.methods:
        raise InputError(f"Reference method '{reference}' is not in the report.")
    keys = ['experiment', 'iteration'] if per_iteration else ['experiment']
    rows = []
    for key, part in report.frame.groupby(keys, sort=True):
        key = key if isinstance(key, tuple) else (key,)
        table = ExperimentReport(part).pivot()
        for rival in table.columns:
            if rival == reference:
                continue
            diffs = (table[reference] - table[rival]).dropna().to_numpy()
            result = _guarded(t_test_paired_diff, diffs)
            rows.append(
                {
                    **dict(zip(keys, key)),
                    'method': f"{reference} - {rival}",
                    'mean_diff_pct': 100.0 * float(diffs.mean()),
                    'sd_diff_pct': 100.0 * float(diffs.std(ddof=1)) if diffs.size > 1 else 0.0,
                    't': result.t,
                    'p': result.p,
                }
            )
    columns = keys + ['method', 'mean_diff_pct', 'sd_diff_pct', 't', 'p']
    return pd.DataFrame(rows, columns=columns)


def method_means(report: ExperimentReport, experiment: Optional[str] = None) -> pd.Series:
    """Pooled mean AUC per method, in the fixed method order."""
    frame = report.frame
    if experiment is not None:
        frame = frame[frame['experiment'] == experiment]
    means = frame.groupby('method')['auc'].mean()
    return means.reindex(ordered_methods(means.index))

