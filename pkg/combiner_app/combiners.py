"""
Rival combination functions the IRT ensemble is benchmarked against.

Every combiner accepts raw ScoreMatrix input (normalized here) or
NormalizedScores, and returns an EnsembleResult with one score per row.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from irt_app.crm import FitConfig
from irt_app.services import IRT, irt_ensemble
from scoring_app.domain import EnsembleResult, NormalizedScores, ScoreMatrix
from scoring_app.exceptions import InputError
from scoring_app.utils import DEFAULT_EPSILON, as_normalized

from .affinity import AffinityConfig, affinity_propagation, median_preference

logger = logging.getLogger(__name__)

AVERAGE = 'Average'
GREEDY = 'Greedy'
GREEDY_AVG = 'Greedy-Avg'
ICWA = 'ICWA'
MAX = 'Max'
THRESH = 'Thresh'

METHOD_ORDER = (IRT, AVERAGE, GREEDY, GREEDY_AVG, ICWA, MAX, THRESH)

# correlations equal to this many decimals count as ties
_CORRELATION_DECIMALS = 12

Scores = Union[ScoreMatrix, NormalizedScores]


@dataclass(frozen=True)
class GreedyConfig:
    """
    kappa is the expected number of anomalies; Greedy-Avg averages Greedy
    over every kappa in the inclusive kappa_range.
    """

    kappa: int = 5
    kappa_range: Tuple[int, int] = (1, 10)

    def __post_init__(self):
        low, high = self.kappa_range
        if self.kappa < 1:
            raise InputError(f"kappa must be at least 1, got {self.kappa}.")
        if not 1 <= low <= high:
            raise InputError(
                f"kappa_range must be a nonempty range from 1 up, got {self.kappa_range}."
            )
        object.__setattr__(self, 'kappa_range', (int(low), int(high)))


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation, 0 when either vector is constant."""
    da, db = a - a.mean(), b - b.mean()
    norm = np.sqrt((da @ da) * (db @ db))
    return float(da @ db / norm) if norm > 0 else 0.0


def column_correlations(values: np.ndarray) -> np.ndarray:
    """Pearson matrix of the columns with constant columns uncorrelated."""
    n = values.shape[1]
    centred = values - values.mean(axis=0)
    norms = np.sqrt((centred ** 2).sum(axis=0))
    safe = np.where(norms > 0, norms, 1.0)
    corr = (centred.T @ centred) / np.outer(safe, safe)
    corr[norms == 0, :] = 0.0
    corr[:, norms == 0] = 0.0
    corr[np.arange(n), np.arange(n)] = 1.0
    return np.clip(corr, -1.0, 1.0)


def _result(method: str, scores: np.ndarray, **params) -> EnsembleResult:
    return EnsembleResult(method=method, scores=scores, params=params)


def average(m: Scores, epsilon: float = DEFAULT_EPSILON) -> EnsembleResult:
    x = as_normalized(m, epsilon)
    return _result(AVERAGE, x.values.mean(axis=1))


def maximum(m: Scores, epsilon: float = DEFAULT_EPSILON) -> EnsembleResult:
    x = as_normalized(m, epsilon)
    return _result(MAX, x.values.max(axis=1))


def thresh(m: Scores, epsilon: float = DEFAULT_EPSILON) -> EnsembleResult:
    """Sum of the scores that lie strictly above their detector's mean."""
    values = as_normalized(m, epsilon).values
    return _result(THRESH, np.where(values > values.mean(axis=0), values, 0.0).sum(axis=1))


def pseudo_target(values: np.ndarray, kappa: int) -> np.ndarray:
    """Top-kappa rows of the row mean set to 1, ties going to the lower row."""
    top = np.argsort(-values.mean(axis=1), kind='stable')[:kappa]
    target = np.zeros(values.shape[0])
    target[top] = 1.0
    return target


def _greedy_selection(values: np.ndarray, target: np.ndarray) -> List[int]:
    to_target = np.array([pearson(values[:, j], target) for j in range(values.shape[1])])
    order = np.argsort(-to_target, kind='stable')
    selected = [int(order[0])]
    current = to_target[order[0]]
    for j in order[1:]:
        candidate = pearson(values[:, selected + [int(j)]].mean(axis=1), target)
        if candidate >= current:
            selected.append(int(j))
            current = candidate
    return selected


def greedy(
    m: Scores, cfg: Optional[GreedyConfig] = None, epsilon: float = DEFAULT_EPSILON
) -> EnsembleResult:
    """
    Correlation-driven detector selection against a pseudo target.

    Starting from the detector most correlated with the binarized row
    mean, detectors are scanned in decreasing correlation and kept when
    the mean of the selection correlates with the target no worse than
    before. The output is the mean of the selected columns.
    """
    cfg = cfg or GreedyConfig()
    x = as_normalized(m, epsilon)
    values = x.values
    if cfg.kappa >= x.n_obs:
        raise InputError(f"kappa={cfg.kappa} must be below the number of observations {x.n_obs}.")
    if np.ptp(values.mean(axis=1)) == 0.0:
        logger.warning("All observations tie on the mean score; Greedy falls back to Average.")
        return _result(
            GREEDY, values.mean(axis=1), kappa=cfg.kappa, selected=list(x.detector_names)
        )
    selected = _greedy_selection(values, pseudo_target(values, cfg.kappa))
    return _result(
        GREEDY,
        values[:, selected].mean(axis=1),
        kappa=cfg.kappa,
        selected=[x.detector_names[j] for j in selected],
    )


def greedy_avg(
    m: Scores, cfg: Optional[GreedyConfig] = None, epsilon: float = DEFAULT_EPSILON
) -> EnsembleResult:
    cfg = cfg or GreedyConfig()
    x = as_normalized(m, epsilon)
    low, high = cfg.kappa_range
    if low >= x.n_obs:
        raise InputError(f"kappa_range {cfg.kappa_range} lies beyond N - 1 = {x.n_obs - 1}.")
    if high >= x.n_obs:
        logger.warning("kappa_range %s clamped to N - 1 = %d.", cfg.kappa_range, x.n_obs - 1)
        high = x.n_obs - 1
    runs = [
        greedy(x, GreedyConfig(kappa=k, kappa_range=(low, high))).scores
        for k in range(low, high + 1)
    ]
    return _result(GREEDY_AVG, np.mean(runs, axis=0), kappa_range=(low, high))


def _duplicate_groups(similarity: np.ndarray) -> Dict[int, List[int]]:
    """Map each representative column to the columns perfectly correlated with it."""
    groups: Dict[int, List[int]] = {}
    owner = {}
    for j in range(similarity.shape[0]):
        for rep in groups:
            if similarity[rep, j] == 1.0:
                owner[j] = rep
                break
        else:
            owner[j] = j
            groups[j] = []
        groups[owner[j]].append(j)
    return groups


def cluster_detectors(
    values: np.ndarray, cfg: Optional[AffinityConfig] = None
) -> Tuple[List[List[int]], bool]:
    """
    Group detector columns by affinity propagation on their correlations.

    Perfectly correlated columns always share a cluster. With fewer than
    three distinct columns, or when propagation yields no stable exemplar
    set, every distinct column forms its own cluster. Returns the clusters
    and whether propagation converged.
    """
    similarity = np.round(column_correlations(values), _CORRELATION_DECIMALS)
    groups = _duplicate_groups(similarity)
    reps = sorted(groups)
    singletons = [groups[rep] for rep in reps]
    if len(reps) < 3:
        return singletons, True

    sub = similarity[np.ix_(reps, reps)]
    cfg = cfg or AffinityConfig()
    result = affinity_propagation(sub, cfg)
    if not result.converged or result.n_clusters == 0:
        logger.warning(
            "Affinity propagation did not settle after %d sweeps (preference %.4f); "
            "using one cluster per detector.",
            result.iterations, median_preference(sub) if cfg.preference is None else cfg.preference,
        )
        return singletons, False
    clusters = [[] for _ in result.exemplars]
    for position, label in enumerate(result.labels):
        clusters[label].extend(groups[reps[position]])
    return [sorted(c) for c in clusters], True


def icwa(
    m: Scores, cfg: Optional[AffinityConfig] = None, epsilon: float = DEFAULT_EPSILON
) -> EnsembleResult:
    """
    Inverse cluster weighted average: detectors are clustered, each cluster
    averages its members, and the clusters are averaged with equal weight.
    """
    x = as_normalized(m, epsilon)
    clusters, converged = cluster_detectors(x.values, cfg)
    scores = np.mean([x.values[:, members].mean(axis=1) for members in clusters], axis=0)
    return _result(
        ICWA,
        scores,
        clusters=[[x.detector_names[j] for j in members] for members in clusters],
        converged=converged,
    )


COMBINERS = {
    AVERAGE: average,
    GREEDY: greedy,
    GREEDY_AVG: greedy_avg,
    ICWA: icwa,
    MAX: maximum,
    THRESH: thresh,
}


def run_all_combiners(
    m: Scores,
    greedy_cfg: Optional[GreedyConfig] = None,
    irt_cfg: Optional[FitConfig] = None,
    epsilon: float = DEFAULT_EPSILON,
    affinity_cfg: Optional[AffinityConfig] = None,
    methods: Sequence[str] = METHOD_ORDER,
) -> List[EnsembleResult]:
    """All seven ensembles, in METHOD_ORDER unless ``methods`` narrows them."""
    x = as_normalized(m, epsilon)
    unknown = [name for name in methods if name not in METHOD_ORDER]
    if unknown:
        raise InputError(f"Unknown ensemble methods {unknown}; choose from {METHOD_ORDER}.")
    builders = {
        IRT: lambda: irt_ensemble(x, epsilon, irt_cfg),
        AVERAGE: lambda: average(x),
        GREEDY: lambda: greedy(x, greedy_cfg),
        GREEDY_AVG: lambda: greedy_avg(x, greedy_cfg),
        ICWA: lambda: icwa(x, affinity_cfg),
        MAX: lambda: maximum(x),
        THRESH: lambda: thresh(x),
    }
    return [builders[name]() for name in METHOD_ORDER if name in methods]
