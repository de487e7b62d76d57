import logging
from typing import Any, Dict, Optional

from django.db import transaction

from .models import AucResult, ExperimentRun
from .report import ExperimentReport

logger = logging.getLogger(__name__)


@transaction.atomic
def save_report(
    report: ExperimentReport,
    experiment: str,
    seed: int = 0,
    iterations: int = 1,
    repetitions: int = 1,
    config: Optional[Dict[str, Any]] = None,
) -> ExperimentRun:
    """Persist a report as one ExperimentRun with an AucResult per row."""
    run = ExperimentRun.objects.create(
        experiment=experiment,
        seed=seed,
        iterations=iterations,
        repetitions=repetitions,
        config=config or {},
    )
    AucResult.objects.bulk_create(
        [
            AucResult(
                run=run,
                source=row.source,
                dataset=row.dataset,
                iteration=row.iteration,
                repetition=row.repetition,
                method=row.method,
                auc=row.auc,
            )
            for row in report.frame.itertuples(index=False)
        ]
    )
    logger.info("Saved run %s with %d AUC rows", run.pk, len(report))
    return run


def load_report(run: ExperimentRun) -> ExperimentReport:
    """Rebuild the report of a stored run."""
    return ExperimentReport.from_records(
        {
            'experiment': run.experiment,
            'source': result.source,
            'dataset': result.dataset,
            'iteration': result.iteration,
            'repetition': result.repetition,
            'method': result.method,
            'auc': result.auc,
        }
        for result in run.results.all()
    )
