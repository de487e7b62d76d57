"""
File-level orchestration behind the management commands.

Each function reads its inputs, runs the library code and writes CSV
(and optionally SVG) outputs under the configured output directory,
returning the paths it wrote.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, Optional, Tuple

import pandas as pd

from combiner_app.combiners import METHOD_ORDER, run_all_combiners
from detector_app.services import run_all
from evaluation_app.metrics import auc
from evaluation_app.report import ExperimentReport
from evaluation_app.stats import (
    BY_DATASET,
    BY_SOURCE,
    best_ensemble_proportions,
    correlation_split,
    false_positive_simulation,
    paired_tests_vs,
    top2_differences,
    top2_significance,
)
from irt_app.services import export_model, fit_scores
from scoring_app.csv_io import (
    read_dataset,
    read_score_matrix,
    write_ensemble_results,
    write_frame,
    write_score_matrix,
)
from scoring_app.exceptions import InputError
from scoring_app.utils import normalize_columns
from synth_app.generators import EXAMPLE, ExperimentSpec

from . import plots
from .config import RunConfig
from .runner import KAPPA_SWEEP, benchmark_dataset, experiment_cell, run_parallel, sweep_method

logger = logging.getLogger(__name__)

ALL_METHODS = 'all'
AUC_SUMMARY_FILE = 'auc_summary.csv'

_METHOD_ALIASES = {name.lower(): name for name in METHOD_ORDER}


def resolve_methods(method: str) -> Tuple[str, ...]:
    """``all`` or one method name, case-insensitive."""
    key = method.strip().lower()
    if key == ALL_METHODS:
        return METHOD_ORDER
    if key not in _METHOD_ALIASES:
        raise InputError(
            f"Unknown method '{method}'; choose 'all' or one of {', '.join(METHOD_ORDER)}."
        )
    return (_METHOD_ALIASES[key],)


def detect(dataset_path: Path, cfg: RunConfig, output: Optional[Path] = None) -> Path:
    ds = read_dataset(dataset_path)
    m = run_all(ds, cfg.detector_config(ds.n_obs), algorithm=cfg.algorithm)
    path = output or cfg.output_path / f"{Path(dataset_path).stem}_scores.csv"
    return write_score_matrix(m, path)


def ensemble(
    scores_path: Path, method: str, cfg: RunConfig, output: Optional[Path] = None
) -> Tuple[Path, Optional[Path]]:
    """
    Apply one or all combiners to a score matrix. With labels present the
    AUC of each method is upserted into the AUC summary file.
    """
    m = read_score_matrix(scores_path)
    results = run_all_combiners(
        normalize_columns(m, cfg.epsilon),
        greedy_cfg=cfg.greedy,
        irt_cfg=cfg.fit,
        epsilon=cfg.epsilon,
        affinity_cfg=cfg.affinity,
        methods=resolve_methods(method),
    )
    stem = Path(scores_path).stem
    path = write_ensemble_results(results, output or cfg.output_path / f"{stem}_ensemble.csv")
    if m.labels is None or m.labels.min() == m.labels.max():
        return path, None
    rows = pd.DataFrame(
        {
            'input': stem,
            'method': [r.method for r in results],
            'auc': [auc(r.scores, m.labels) for r in results],
        }
    )
    return path, _upsert_summary(rows, cfg.output_path / AUC_SUMMARY_FILE)


def _upsert_summary(rows: pd.DataFrame, path: Path) -> Path:
    if path.exists():
        previous = pd.read_csv(path, float_precision='round_trip')
        key = ['input', 'method']
        keep = ~previous.set_index(key).index.isin(rows.set_index(key).index)
        rows = pd.concat([previous[keep], rows], ignore_index=True)
    return write_frame(rows, path)


def irt_report(scores_path: Path, cfg: RunConfig) -> Tuple[Path, Path]:
    m = read_score_matrix(scores_path)
    model = fit_scores(m, cfg.epsilon, cfg.fit)
    return export_model(model, cfg.output_path / Path(scores_path).stem)


def run_experiment(
    spec: ExperimentSpec, cfg: RunConfig, kappa_sweep: bool = False
) -> ExperimentReport:
    """Every cell of the grid, seven methods each, plus the Greedy kappa sweep if asked."""
    sweep = KAPPA_SWEEP if kappa_sweep else ()
    tasks = [
        (spec.experiment, iteration, repetition, spec.seed, cfg.plan, sweep)
        for iteration, repetition in spec.cells()
    ]
    logger.info(
        "Running %s: %d iterations x %d repetitions on %d job(s)",
        spec.experiment, spec.iterations, spec.repetitions, cfg.jobs,
    )
    cells = run_parallel(experiment_cell, tasks, cfg.jobs)
    report = ExperimentReport.from_records(record for cell in cells for record in cell)
    if not report.is_complete():
        logger.warning(
            "%s report is missing cells: %s", spec.experiment, report.missing_cells()[:5]
        )
    return report


def write_experiment(
    report: ExperimentReport, spec: ExperimentSpec, cfg: RunConfig, with_plots: bool = True
) -> Dict[str, Path]:
    out = cfg.output_path / spec.experiment.lower()
    seven = report.only_methods(METHOD_ORDER)
    paths = {
        'report': report.write(out / 'report.csv'),
        'summary': report.write_summary(out / 'summary.csv'),
        'ttests': write_frame(paired_tests_vs(seven), out / 'ttests.csv'),
        'ttests_by_iteration': write_frame(
            paired_tests_vs(seven, per_iteration=True), out / 'ttests_by_iteration.csv'
        ),
    }
    if spec.experiment == EXAMPLE and len(seven) != len(report):
        paths['kappa_sweep'] = write_frame(_sweep_table(report), out / 'kappa_sweep.csv')
    if with_plots:
        title = f"{spec.experiment}: mean AUC over {spec.repetitions} repetitions"
        paths['auc_lines'] = plots.plot_auc_lines(
            seven.mean_by_iteration(spec.experiment), title, out / 'auc_lines.svg'
        )
    return paths


def _sweep_table(report: ExperimentReport) -> pd.DataFrame:
    """AUC of each swept Greedy kappa side by side per cell."""
    frame = report.frame[report.frame['method'].isin([sweep_method(k) for k in KAPPA_SWEEP])]
    table = frame.pivot(index=['iteration', 'repetition'], columns='method', values='auc')
    return table.reset_index()


def fp_sim(
    cfg: RunConfig, n_sources: int, n_datasets: int, n_methods: int, reps: int
) -> Tuple[Path, float, float]:
    summary = false_positive_simulation(
        n_sources=n_sources, n_datasets=n_datasets, n_methods=n_methods, reps=reps, seed=cfg.seed
    )
    frame = pd.DataFrame(
        {'replicate': range(1, len(summary.counts) + 1), 'false_positives': summary.counts}
    )
    path = write_frame(frame, cfg.output_path / 'fp_sim.csv')
    return path, summary.mean, summary.sd


def run_benchmark(directory: Path, cfg: RunConfig) -> Tuple[ExperimentReport, pd.DataFrame]:
    """Score every labeled CSV in ``directory`` (sorted by name)."""
    files = sorted(Path(directory).glob('*.csv'))
    if not files:
        raise InputError(f"No CSV files found in {directory}.")
    outcomes = run_parallel(benchmark_dataset, [(path, cfg.plan) for path in files], cfg.jobs)
    records = [record for rows, _ in outcomes for record in rows]
    counts = [c for _, c in outcomes if c is not None]
    if not records:
        raise InputError(f"None of the {len(files)} files in {directory} carries anomaly labels.")
    return ExperimentReport.from_records(records), pd.DataFrame(counts)


def write_benchmark(
    report: ExperimentReport, correlations: pd.DataFrame, cfg: RunConfig, with_plots: bool = True
) -> Dict[str, Path]:
    out = cfg.output_path / 'benchmark'
    proportions = pd.DataFrame(
        {
            BY_DATASET: best_ensemble_proportions(report, by=BY_DATASET),
            BY_SOURCE: best_ensemble_proportions(report, by=BY_SOURCE),
        }
    ).T
    cor70 = dict(zip(correlations['dataset'], correlations['cor70']))
    split = correlation_split(report, cor70)
    paths = {
        'report': report.write(out / 'report.csv'),
        'correlations': write_frame(correlations, out / 'correlations.csv'),
        'proportions': write_frame(
            proportions.rename_axis('by').reset_index(), out / 'proportions.csv'
        ),
        'correlation_split': write_frame(
            split.rename_axis('group').reset_index(), out / 'correlation_split.csv'
        ),
        'top2': write_frame(top2_significance(report, BY_SOURCE), out / 'top2.csv'),
    }
    if with_plots:
        paths['proportions_plot'] = plots.plot_proportions(
            split.drop(columns='n_datasets'),
            out / 'proportions.svg',
        )
        paths['top2_plot'] = plots.plot_top2_differences(
            top2_differences(report, BY_SOURCE), out / 'top2_differences.svg'
        )
    return paths

