"""
Affinity propagation over a dense similarity matrix.

Responsibilities and availabilities are exchanged with damping until the
set of exemplars stays unchanged for ``convergence_iter`` sweeps. No
random jitter is added to the similarities, so results are reproducible;
points are assigned to their most similar exemplar, lowest index first.

The message passing is written out here instead of calling
sklearn.cluster.AffinityPropagation: that estimator perturbs the
similarities with seeded noise, so tied exemplars do not resolve to the
lowest index, and scikit-learn is not a dependency of this project.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from scoring_app.exceptions import InputError

logger = logging.getLogger(__name__)

DEFAULT_DAMPING = 0.9
DEFAULT_MAX_ITER = 200
DEFAULT_CONVERGENCE_ITER = 15


@dataclass(frozen=True)
class AffinityConfig:
    damping: float = DEFAULT_DAMPING
    max_iter: int = DEFAULT_MAX_ITER
    convergence_iter: int = DEFAULT_CONVERGENCE_ITER
    # None means the median of the off-diagonal similarities
    preference: Optional[float] = None

    def __post_init__(self):
        if not 0.5 <= self.damping < 1.0:
            raise InputError(f"damping must lie in [0.5, 1), got {self.damping}.")
        if self.max_iter < 1 or self.convergence_iter < 1:
            raise InputError("max_iter and convergence_iter must be at least 1.")


@dataclass(frozen=True)
class AffinityResult:
    exemplars: Tuple[int, ...]
    labels: np.ndarray
    iterations: int
    converged: bool

    @property
    def n_clusters(self) -> int:
        return len(self.exemplars)


def median_preference(similarity: np.ndarray) -> float:
    n = similarity.shape[0]
    if n < 2:
        return float(similarity[0, 0]) if n else 0.0
    return float(np.median(similarity[~np.eye(n, dtype=bool)]))


def affinity_propagation(
    similarity: np.ndarray, cfg: Optional[AffinityConfig] = None
) -> AffinityResult:
    cfg = cfg or AffinityConfig()
    S = np.array(similarity, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InputError("The similarity matrix must be square.")
    n = S.shape[0]
    if n == 1:
        return AffinityResult(
            exemplars=(0,), labels=np.zeros(1, dtype=int), iterations=0, converged=True
        )

    preference = median_preference(S) if cfg.preference is None else cfg.preference
    np.fill_diagonal(S, preference)
    rows = np.arange(n)
    R = np.zeros_like(S)
    A = np.zeros_like(S)
    history = np.zeros((n, cfg.convergence_iter), dtype=bool)
    converged = False
    iteration = 0

    for iteration in range(1, cfg.max_iter + 1):
        # responsibilities
        AS = A + S
        best = np.argmax(AS, axis=1)
        first = AS[rows, best]
        AS[rows, best] = -np.inf
        second = AS.max(axis=1)
        R_new = S - first[:, None]
        R_new[rows, best] = S[rows, best] - second
        R = cfg.damping * R + (1.0 - cfg.damping) * R_new

        # availabilities
        Rp = np.maximum(R, 0.0)
        np.fill_diagonal(Rp, R.diagonal())
        A_new = Rp.sum(axis=0)[None, :] - Rp
        self_available = A_new.diagonal().copy()
        A_new = np.minimum(A_new, 0.0)
        np.fill_diagonal(A_new, self_available)
        A = cfg.damping * A + (1.0 - cfg.damping) * A_new

        is_exemplar = (A.diagonal() + R.diagonal()) > 0
        history[:, (iteration - 1) % cfg.convergence_iter] = is_exemplar
        if iteration >= cfg.convergence_iter:
            stable = history.all(axis=1) | ~history.any(axis=1)
            if stable.all() and is_exemplar.any():
                converged = True
                break

    exemplars = np.flatnonzero(is_exemplar)
    if exemplars.size == 0:
        logger.debug("Affinity propagation found no exemplars after %d sweeps.", iteration)
        return AffinityResult(
            exemplars=(), labels=np.full(n, -1), iterations=iteration, converged=False
        )

    labels = np.argmax(S[:, exemplars], axis=1)
    labels[exemplars] = np.arange(exemplars.size)
    return AffinityResult(
        exemplars=tuple(int(k) for k in exemplars),
        labels=labels,
        iterations=iteration,
        converged=converged,
    )
