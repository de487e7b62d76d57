"""
The seven nearest-neighbor anomaly scorers.

Every scorer takes a NeighborIndex plus a DetectorConfig and returns N
finite scores, larger meaning more anomalous. Ratios of densities are
taken through :func:`_ratio`, which defines 0/0 as 1 and floors other
zero denominators so duplicated points never produce infinities.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from scoring_app.exceptions import InputError

from .neighbors import NeighborIndex

logger = logging.getLogger(__name__)

KNN_AGG = 'KNN-AGG'
LOF = 'LOF'
COF = 'COF'
INFLO = 'INFLO'
KDEOS = 'KDEOS'
LDF = 'LDF'
LDOF = 'LDOF'

DETECTOR_NAMES = (KNN_AGG, LOF, COF, INFLO, KDEOS, LDF, LDOF)

REGIME_T1 = 't1'
REGIME_T2 = 't2'

_FLOOR = 1e-12
# densities inside a neighborhood are rescaled to a max of 1 before comparing
_SPREAD_FLOOR = 1e-9
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class DetectorConfig:
    """
    Neighborhood sizes shared by the detectors.

    ``k`` drives LOF, COF, INFLO, LDF and LDOF; ``k_min..k_max`` drives
    KNN-AGG and KDEOS. ``h`` and ``c`` are the LDF bandwidth scale and
    comparison constant.
    """

    k: int = 5
    k_min: int = 5
    k_max: int = 10
    h: float = 1.0
    c: float = 0.1

    def __post_init__(self):
        if self.k < 1:
            raise InputError(f"k must be at least 1, got {self.k}.")
        if not 1 <= self.k_min <= self.k_max:
            raise InputError(
                f"Need 1 <= k_min <= k_max, got k_min={self.k_min}, k_max={self.k_max}."
            )
        if self.h <= 0 or self.c <= 0:
            raise InputError("LDF constants h and c must be positive.")

    @property
    def index_k(self) -> int:
        """Neighbor-list length an index must hold for every detector."""
        return max(self.k, self.k_max)

    def clamped(self, n_obs: int) -> 'DetectorConfig':
        """Shrink neighborhoods so that k, k_max < N."""
        top = n_obs - 1
        if self.index_k <= top:
            return self
        k_max = min(self.k_max, top)
        clamped = replace(self, k=min(self.k, top), k_min=min(self.k_min, k_max), k_max=k_max)
        logger.warning(
            "Neighborhoods clamped for N=%d: k=%d, k_min=%d, k_max=%d.",
            n_obs, clamped.k, clamped.k_min, clamped.k_max,
        )
        return clamped

    @classmethod
    def for_regime(cls, regime: str, n_obs: int) -> 'DetectorConfig':
        """
        T1 uses the small defaults k = k_min = 5, k_max = 10; T2 scales with the
        data, k = k_min = max(ceil(N/10), 50), k_max = k + 10.
        """
        regime = regime.lower()
        if regime == REGIME_T1:
            cfg = cls(k=5, k_min=5, k_max=10)
        elif regime == REGIME_T2:
            k = max(math.ceil(n_obs / 10), 50)
            cfg = cls(k=k, k_min=k, k_max=k + 10)
        else:
            raise InputError(f"Unknown regime '{regime}', expected t1 or t2.")
        return cfg.clamped(n_obs)


def _ratio(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    num, den = np.broadcast_arrays(num, den)
    out = num / np.maximum(den, _FLOOR)
    return np.where((num == 0.0) & (den == 0.0), 1.0, out)


def knn_agg(idx: NeighborIndex, cfg: DetectorConfig) -> np.ndarray:
    """Sum of k-distances for k = k_min..k_max."""
    return idx.neighbor_distances(cfg.k_max)[:, cfg.k_min - 1:].sum(axis=1)


def lof(idx: NeighborIndex, cfg: DetectorConfig) -> np.ndarray:
    """Local outlier factor at MinPts = k."""
    k = cfg.k
    nbrs = idx.neighbors(k)
    reach = np.maximum(idx.neighbor_distances(k), idx.kdist(k)[nbrs])
    # 1 / lrd
    mean_reach = reach.mean(axis=1)
    return _ratio(mean_reach[:, None], mean_reach[nbrs]).mean(axis=1)


def _chaining_distance(dist: np.ndarray) -> float:
    """
    Average chaining distance along the set-based nearest path that starts
    at row 0 of ``dist`` and grows through the remaining rows in order of
    proximity to the set built so far.
    """
    size = dist.shape[0]
    k = size - 1
    joined = np.zeros(size, dtype=bool)
    joined[0] = True
    reach = dist[0].copy()
    total = 0.0
    for step in range(1, size):
        reach[joined] = np.inf
        nxt = int(np.argmin(reach))
        total += 2.0 * (k + 1 - step) / (k * (k + 1)) * reach[nxt]
        joined[nxt] = True
        reach = np.minimum(reach, dist[nxt])
    return total


def cof(idx: NeighborIndex, cfg: DetectorConfig) -> np.ndarray:
    """Connectivity-based outlier factor."""
    nbrs = idx.neighbors(cfg.k)
    chaining = np.array(
        [
            _chaining_distance(idx.pairwise(np.concatenate(([i], nbrs[i]))))
            for i in range(idx.n_obs)
        ]
    )
    return _ratio(chaining, chaining[nbrs].mean(axis=1))


def inflo(idx: NeighborIndex, cfg: DetectorConfig) -> np.ndarray:
    """
    Influenced outlierness over the influence space k-NN U reverse k-NN.
    Points nobody lists as a neighbor fall back to their k-NN set.
    """
    k = cfg.k
    nbrs = idx.neighbors(k)
    density = 1.0 / np.maximum(idx.kdist(k), _FLOOR)
    reverse = idx.reverse_neighbors(k)
    scores = np.empty(idx.n_obs)
    for i in range(idx.n_obs):
        space = np.union1d(nbrs[i], reverse[i]) if reverse[i].size else nbrs[i]
        scores[i] = density[space].mean() / density[i]
    return scores


def kdeos(idx: NeighborIndex, cfg: DetectorConfig) -> np.ndarray:
    """
    Kernel density outlier score: for every k in k_min..k_max a Gaussian
    density with per-point bandwidth k-distance, standardized against the
    neighborhood with the sample standard deviation. The z-scores of the
    negated density are averaged over k and mapped through the standard
    normal CDF, so scores lie in [0, 1] with 0.5 for a typical density.
    """
    dim = idx.features.shape[1]
    total = np.zeros(idx.n_obs)
    ks = range(cfg.k_min, cfg.k_max + 1)
    for k in ks:
        nbrs = idx.neighbors(k)
        bandwidth = np.maximum(idx.kdist(k), _FLOOR)[nbrs]
        log_kernel = (
            -0.5 * (idx.neighbor_distances(k) / bandwidth) ** 2
            - dim * (_LOG_SQRT_2PI + np.log(bandwidth))
        )
        log_density = logsumexp(log_kernel, axis=1) - math.log(k)
        total += _standardized_sparsity(log_density, nbrs)
    return norm.cdf(total / len(ks))


def _standardized_sparsity(log_density: np.ndarray, nbrs: np.ndarray) -> np.ndarray:
    around = log_density[nbrs]
    top = np.maximum(around.max(axis=1), log_density)
    around = np.exp(around - top[:, None])
    own = np.exp(log_density - top)
    ddof = 1 if nbrs.shape[1] > 1 else 0
    spread = np.maximum(around.std(axis=1, ddof=ddof), _SPREAD_FLOOR)
    return (around.mean(axis=1) - own) / spread


def ldf(idx: NeighborIndex, cfg: DetectorConfig) -> np.ndarray:
    """
    Local density factor: Gaussian kernel density with bandwidth
    h * k-distance of the neighbor, evaluated at reachability distance,
    compared as mean(LDE_nbrs) / (LDE + c * mean(LDE_nbrs)).
    """
    k = cfg.k
    dim = idx.features.shape[1]
    nbrs = idx.neighbors(k)
    kdist = idx.kdist(k)
    bandwidth = cfg.h * np.maximum(kdist, _FLOOR)[nbrs]
    reach = np.maximum(idx.neighbor_distances(k), kdist[nbrs])
    log_kernel = -0.5 * (reach / bandwidth) ** 2 - dim * (_LOG_SQRT_2PI + np.log(bandwidth))
    log_lde = logsumexp(log_kernel, axis=1) - math.log(k)

    around = log_lde[nbrs]
    top = np.maximum(around.max(axis=1), log_lde)
    around_mean = np.exp(around - top[:, None]).mean(axis=1)
    own = np.exp(log_lde - top)
    return around_mean / (own + cfg.c * around_mean)


def ldof(idx: NeighborIndex, cfg: DetectorConfig) -> np.ndarray:
    """Mean distance to the k-NN over the mean pairwise distance among them."""
    k = cfg.k
    if k < 2:
        raise InputError("LDOF needs k >= 2 to form neighbor pairs.")
    nbrs = idx.neighbors(k)
    to_neighbors = idx.neighbor_distances(k).mean(axis=1)
    inner = np.array([idx.pairwise(nbrs[i]).sum() / (k * (k - 1)) for i in range(idx.n_obs)])
    return _ratio(to_neighbors, inner)


DETECTORS = {
    KNN_AGG: knn_agg,
    LOF: lof,
    COF: cof,
    INFLO: inflo,
    KDEOS: kdeos,
    LDF: ldf,
    LDOF: ldof,
}
