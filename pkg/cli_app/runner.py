"""
Per-dataset scoring used by the experiment and benchmark commands.

Nothing here touches Django, so cells can run in joblib worker processes.
Results come back in task order whatever the number of workers.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed

from combiner_app.affinity import AffinityConfig
from combiner_app.combiners import METHOD_ORDER, GreedyConfig, greedy, run_all_combiners
from detector_app.detectors import DetectorConfig
from detector_app.neighbors import BRUTE
from detector_app.services import run_all
from evaluation_app.metrics import auc
from evaluation_app.stats import correlation_counts
from irt_app.crm import FitConfig
from scoring_app.csv_io import read_dataset
from scoring_app.domain import EnsembleResult, LabeledDataset, ScoreMatrix
from scoring_app.utils import DEFAULT_EPSILON, normalize_columns
from synth_app.generators import generate

logger = logging.getLogger(__name__)

# the annulus example's second Greedy run
KAPPA_SWEEP = (3, 10)


def sweep_method(kappa: int) -> str:
    return f"Greedy (kappa={kappa})"


@dataclass(frozen=True)
class ScoringPlan:
    """Everything needed to score one dataset, free of Django objects."""

    regime: Optional[str] = 't1'
    k: Optional[int] = None
    k_min: Optional[int] = None
    k_max: Optional[int] = None
    h: float = 1.0
    c: float = 0.1
    algorithm: str = BRUTE
    epsilon: float = DEFAULT_EPSILON
    greedy: GreedyConfig = field(default_factory=GreedyConfig)
    fit: FitConfig = field(default_factory=FitConfig)
    affinity: AffinityConfig = field(default_factory=AffinityConfig)

    def detector_config(self, n_obs: int) -> DetectorConfig:
        if self.regime:
            cfg = DetectorConfig.for_regime(self.regime, n_obs)
            return DetectorConfig(k=cfg.k, k_min=cfg.k_min, k_max=cfg.k_max, h=self.h, c=self.c)
        return DetectorConfig(k=self.k, k_min=self.k_min, k_max=self.k_max, h=self.h, c=self.c)


def score_dataset(
    ds: LabeledDataset,
    plan: ScoringPlan,
    methods: Sequence[str] = METHOD_ORDER,
    kappa_sweep: Sequence[int] = (),
) -> Tuple[ScoreMatrix, List[EnsembleResult]]:
    """Detector scores and ensemble results for one dataset."""
    m = run_all(ds, plan.detector_config(ds.n_obs), algorithm=plan.algorithm)
    x = normalize_columns(m, plan.epsilon)
    results = run_all_combiners(
        x,
        greedy_cfg=plan.greedy,
        irt_cfg=plan.fit,
        epsilon=plan.epsilon,
        affinity_cfg=plan.affinity,
        methods=methods,
    )
    for kappa in kappa_sweep:
        swept = greedy(x, GreedyConfig(kappa=kappa, kappa_range=plan.greedy.kappa_range))
        results.append(
            EnsembleResult(method=sweep_method(kappa), scores=swept.scores, params=swept.params)
        )
    return m, results


def _records(ds: LabeledDataset, results, **cell) -> List[dict]:
    return [
        {**cell, 'dataset': ds.name, 'method': result.method, 'auc': auc(result.scores, ds.labels)}
        for result in results
    ]


def experiment_cell(
    experiment: str,
    iteration: int,
    repetition: int,
    seed: int,
    plan: ScoringPlan,
    kappa_sweep: Sequence[int] = (),
) -> List[dict]:
    ds = generate(experiment, iteration, seed, repetition)
    _, results = score_dataset(ds, plan, kappa_sweep=kappa_sweep)
    logger.debug("Cell %s iteration %d repetition %d done", experiment, iteration, repetition)
    return _records(
        ds,
        results,
        experiment=experiment,
        source=experiment,
        iteration=iteration,
        repetition=repetition,
    )


def benchmark_dataset(path: Path, plan: ScoringPlan) -> Tuple[List[dict], Optional[Dict[str, int]]]:
    """
    Records and correlation counts for one labeled CSV; the source is the
    file name up to its first underscore. Files without both classes are
    skipped.
    """
    ds = read_dataset(path)
    if not ds.has_labels or ds.n_anomalies == 0:
        logger.warning("%s has no anomaly labels; skipped.", path)
        return [], None
    m, results = score_dataset(ds, plan)
    cor70, cor80, cor90 = correlation_counts(m)
    source = ds.name.split('_', 1)[0]
    records = _records(
        ds, results, experiment='BENCHMARK', source=source, iteration=0, repetition=0
    )
    counts = {'dataset': ds.name, 'source': source, 'cor70': cor70, 'cor80': cor80, 'cor90': cor90}
    return records, counts


def run_parallel(function, tasks: Sequence[tuple], jobs: int = 1) -> list:
    """Apply ``function`` to each argument tuple, keeping task order."""
    if jobs == 1 or len(tasks) <= 1:
        return [function(*args) for args in tasks]
    return Parallel(n_jobs=jobs)(delayed(function)(*args) for args in tasks)
