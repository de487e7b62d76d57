"""
Column scaling and the logit reparametrization of detector scores.
"""
import logging
from typing import Union

import numpy as np
from scipy.special import expit, logit

from .domain import LogitScores, NormalizedScores, ScoreMatrix
from .exceptions import InputError

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.005


def normalize_columns(m: ScoreMatrix, epsilon: float = DEFAULT_EPSILON) -> NormalizedScores:
    """
    Min-max map every detector column onto [epsilon, 1 - epsilon].

    A constant column carries no ranking information and maps to 0.5
    everywhere, i.e. a neutral logit of 0.
    """
    if not 0.0 < epsilon < 0.5:
        raise InputError(f"epsilon must lie in (0, 0.5), got {epsilon}.")
    scores = np.asarray(m.scores, dtype=np.float64)
    names = tuple(m.detector_names)
    out = np.empty_like(scores)
    for j in range(scores.shape[1]):
        column = scores[:, j]
        if not np.isfinite(column).all():
            raise InputError(f"Detector column '{names[j]}' contains non-finite scores.")
        low, high = column.min(), column.max()
        if high == low:
            logger.warning("Detector column %r is constant; mapping it to 0.5.", names[j])
            out[:, j] = 0.5
            continue
        out[:, j] = epsilon + (1.0 - 2.0 * epsilon) * (column - low) / (high - low)
    return NormalizedScores(values=out, epsilon=epsilon, detector_names=names)


def to_logit(x: NormalizedScores) -> LogitScores:
    """z = ln(x / (1 - x)) elementwise."""
    return LogitScores(values=logit(x.values), detector_names=x.detector_names)


def from_logit(z: Union[LogitScores, np.ndarray]) -> np.ndarray:
    """Inverse of :func:`to_logit`: x = e^z / (1 + e^z)."""
    values = z.values if isinstance(z, LogitScores) else np.asarray(z, dtype=np.float64)
    return expit(values)


def as_normalized(
    m: Union[ScoreMatrix, NormalizedScores], epsilon: float = DEFAULT_EPSILON
) -> NormalizedScores:
    """Pass NormalizedScores through untouched, normalize anything else."""
    if isinstance(m, NormalizedScores):
        return m
    return normalize_columns(m, epsilon)
