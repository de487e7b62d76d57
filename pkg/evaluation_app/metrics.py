import logging

import numpy as np
from scipy.stats import rankdata

from scoring_app.exceptions import InputError

logger = logging.getLogger(__name__)


def auc(scores, labels) -> float:
    """
    Area under the ROC curve via the Mann-Whitney statistic.

    Higher scores mean "more anomalous"; tied scores share midranks, so a
    positive and a negative with equal scores contribute 1/2.
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if scores.shape != labels.shape:
        raise InputError(f"{scores.size} scores for {labels.size} labels.")
    if not np.isfinite(scores).all():
        raise InputError("AUC needs finite scores.")
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InputError("AUC needs at least one anomaly and one normal observation.")
    ranks = rankdata(scores, method='average')
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))
