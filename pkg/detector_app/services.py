import logging
from typing import Optional

import numpy as np

from scoring_app.domain import LabeledDataset, ScoreMatrix
from scoring_app.exceptions import EnsembleError

from . import neighbors
from .detectors import DETECTOR_NAMES, DETECTORS, DetectorConfig

logger = logging.getLogger(__name__)


def run_all(
    ds: LabeledDataset,
    cfg: Optional[DetectorConfig] = None,
    algorithm: str = neighbors.BRUTE,
) -> ScoreMatrix:
    """
    Score ``ds`` with all seven detectors.

    Columns come out in the order of ``DETECTOR_NAMES``. A detector that
    fails or produces non-finite scores contributes a zero column and a
    warning instead of aborting the run.
    """
    cfg = (cfg or DetectorConfig()).clamped(ds.n_obs)
    idx = neighbors.build(ds, cfg.index_k, algorithm=algorithm)
    columns = []
    for name in DETECTOR_NAMES:
        try:
            scores = np.asarray(DETECTORS[name](idx, cfg), dtype=np.float64)
            if not np.isfinite(scores).all():
                raise FloatingPointError("non-finite scores")
        except (EnsembleError, FloatingPointError, ValueError) as exc:
            logger.warning("%s failed on %s (%s); using a zero column.", name, ds.name, exc)
            scores = np.zeros(ds.n_obs)
        columns.append(scores)
    logger.info(
        "Scored %s (N=%d, d=%d) with k=%d, k_min=%d, k_max=%d",
        ds.name, ds.n_obs, ds.n_dim, cfg.k, cfg.k_min, cfg.k_max,
    )
    return ScoreMatrix(
        scores=np.column_stack(columns), detector_names=DETECTOR_NAMES, labels=ds.labels
    )
