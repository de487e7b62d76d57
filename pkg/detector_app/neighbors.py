"""
Exact Euclidean k-nearest-neighbor index.

Neighbor lists are sorted by distance with ties broken by ascending point
index, and a point is never listed as its own neighbor (duplicates of it
are). The brute-force build is the reference; the kd-tree build answers
the same contract faster for low-dimensional data.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Union

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from scoring_app.domain import LabeledDataset
from scoring_app.exceptions import InputError

logger = logging.getLogger(__name__)

BRUTE = 'brute'
KD_TREE = 'kd_tree'

# Rows per cdist block; keeps the brute build at O(chunk * N) memory.
_CHUNK_ROWS = 512
# Relative widening of the kd-tree tie ball.
_TIE_SLACK = 1e-9


@dataclass(frozen=True)
class NeighborIndex:
    features: np.ndarray
    indices: np.ndarray
    distances: np.ndarray
    algorithm: str = BRUTE

    @property
    def n_obs(self) -> int:
        return self.features.shape[0]

    @property
    def k_max(self) -> int:
        return self.indices.shape[1]

    def _check_k(self, k: int) -> None:
        if not 1 <= k <= self.k_max:
            raise InputError(f"k must lie in [1, {self.k_max}], got {k}.")

    def knn_dist(self, i: int, k: int) -> float:
        """Distance from point i to its k-th nearest neighbor."""
        self._check_k(k)
        return float(self.distances[i, k - 1])

    def kdist(self, k: int) -> np.ndarray:
        """k-distance of every point."""
        self._check_k(k)
        return self.distances[:, k - 1]

    def neighbors(self, k: int) -> np.ndarray:
        """N x k matrix of neighbor ids."""
        self._check_k(k)
        return self.indices[:, :k]

    def neighbor_distances(self, k: int) -> np.ndarray:
        self._check_k(k)
        return self.distances[:, :k]

    def reverse_neighbors(self, k: int) -> List[np.ndarray]:
        """For each point, the ids of points that list it among their k-NN."""
        nbrs = self.neighbors(k)
        owners = np.repeat(np.arange(self.n_obs), k)
        targets = nbrs.reshape(-1)
        order = np.argsort(targets, kind='stable')
        split_at = np.searchsorted(targets[order], np.arange(1, self.n_obs))
        return np.split(owners[order], split_at)

    def pairwise(self, ids: np.ndarray) -> np.ndarray:
        """Distance matrix among the given points."""
        points = self.features[ids]
        return cdist(points, points)


def build(
    ds: Union[LabeledDataset, np.ndarray], k_max: int, algorithm: str = BRUTE
) -> NeighborIndex:
    """
    Build exact k-NN lists up to ``k_max`` for every point.

    A ``k_max`` that reaches N is clamped to N - 1 with a warning.
    """
    features = ds.features if isinstance(ds, LabeledDataset) else np.asarray(ds, dtype=np.float64)
    if features.ndim == 1:
        features = features.reshape(-1, 1)
    n_obs = features.shape[0]
    if n_obs < 2:
        raise InputError(f"A neighbor index needs at least 2 points, got {n_obs}.")
    if k_max < 1:
        raise InputError(f"k_max must be at least 1, got {k_max}.")
    if k_max >= n_obs:
        logger.warning("k_max=%d is not below N=%d; clamping to %d.", k_max, n_obs, n_obs - 1)
        k_max = n_obs - 1

    if algorithm == BRUTE:
        indices, distances = _build_brute(features, k_max)
    elif algorithm == KD_TREE:
        indices, distances = _build_kd_tree(features, k_max)
    else:
        raise InputError(f"Unknown neighbor algorithm '{algorithm}'.")

    indices.setflags(write=False)
    distances.setflags(write=False)
    logger.debug("Built %s neighbor index: N=%d, k_max=%d", algorithm, n_obs, k_max)
    return NeighborIndex(
        features=features, indices=indices, distances=distances, algorithm=algorithm
    )


def _build_brute(features: np.ndarray, k_max: int):
    n_obs = features.shape[0]
    indices = np.empty((n_obs, k_max), dtype=np.intp)
    distances = np.empty((n_obs, k_max), dtype=np.float64)
    for start in range(0, n_obs, _CHUNK_ROWS):
        stop = min(start + _CHUNK_ROWS, n_obs)
        block = cdist(features[start:stop], features)
        rows = np.arange(stop - start)
        block[rows, rows + start] = np.inf
        # stable sort keeps ascending ids among equal distances
        order = np.argsort(block, axis=1, kind='stable')[:, :k_max]
        indices[start:stop] = order
        distances[start:stop] = np.take_along_axis(block, order, axis=1)
    return indices, distances


def _build_kd_tree(features: np.ndarray, k_max: int):
    n_obs = features.shape[0]
    tree = cKDTree(features)
    # the k_max + 1 hits include the point itself, so the last one bounds
    # the k_max-th neighbor; the ball around it holds every tie at that distance
    reach, _ = tree.query(features, k=k_max + 1)
    balls = tree.query_ball_point(features, r=reach[:, -1] * (1.0 + _TIE_SLACK))
    indices = np.empty((n_obs, k_max), dtype=np.intp)
    distances = np.empty((n_obs, k_max), dtype=np.float64)
    for i in range(n_obs):
        ids = np.asarray(balls[i], dtype=np.intp)
        ids = ids[ids != i]
        # tree distances may differ from cdist in the last bit
        dist = cdist(features[i : i + 1], features[ids])[0]
        order = np.lexsort((ids, dist))[:k_max]
        indices[i] = ids[order]
        distances[i] = dist[order]
    return indices, distances
