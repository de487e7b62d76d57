"""
Domain types exchanged between the apps.

All arrays are stored as read-only float64 (labels as int8) copies, so an
instance can be shared freely once constructed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .exceptions import InputError


def _frozen(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LabeledDataset:
    """
    Feature matrix with optional 0/1 anomaly labels.

    Attributes:
        features: N x d matrix of finite reals.
        labels: optional length-N vector, 1 marks an anomaly.
        name: identifier used in reports and file names.
        feature_names: column names, defaulting to ``x1..xd``.
    """

    features: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = 'dataset'
    feature_names: Tuple[str, ...] = ()

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        if features.ndim != 2:
            raise InputError(f"{self.name}: features must be a 2-D matrix.")
        n_obs, n_dim = features.shape
        if n_obs < 2:
            raise InputError(f"{self.name}: at least 2 observations are required, got {n_obs}.")
        if n_dim < 1:
            raise InputError(f"{self.name}: at least 1 feature is required.")
        bad = ~np.isfinite(features)
        if bad.any():
            column = int(np.argwhere(bad)[0][1])
            raise InputError(f"{self.name}: non-finite feature value in column {column}.")
        object.__setattr__(self, 'features', _frozen(features))

        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (n_obs,):
                raise InputError(
                    f"{self.name}: expected {n_obs} labels, got shape {labels.shape}."
                )
            if not np.isin(labels, (0, 1)).all():
                raise InputError(f"{self.name}: labels must be 0 or 1.")
            if not (labels == 0).any():
                raise InputError(f"{self.name}: labels must contain at least one 0.")
            object.__setattr__(self, 'labels', _frozen(labels, dtype=np.int8))

        names = tuple(self.feature_names) or tuple(f"x{j + 1}" for j in range(n_dim))
        if len(names) != n_dim:
            raise InputError(f"{self.name}: {len(names)} feature names for {n_dim} columns.")
        object.__setattr__(self, 'feature_names', names)

    @property
    def n_obs(self) -> int:
        return self.features.shape[0]

    @property
    def n_dim(self) -> int:
        return self.features.shape[1]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    @property
    def n_anomalies(self) -> int:
        return 0 if self.labels is None else int(self.labels.sum())


@dataclass(frozen=True)
class ScoreMatrix:
    """N observations x n detectors of raw anomaly scores."""

    scores: np.ndarray
    detector_names: Tuple[str, ...]
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        scores = np.array(self.scores, dtype=np.float64)
        if scores.ndim != 2:
            raise InputError("Score matrix must be 2-D (observations x detectors).")
        names = tuple(self.detector_names)
        if len(names) != scores.shape[1]:
            raise InputError(
                f"{len(names)} detector names for {scores.shape[1]} score columns."
            )
        for j, name in enumerate(names):
            if not np.isfinite(scores[:, j]).all():
                raise InputError(f"Detector column '{name}' contains non-finite scores.")
        object.__setattr__(self, 'scores', _frozen(scores))
        object.__setattr__(self, 'detector_names', names)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (scores.shape[0],):
                raise InputError("Label vector length does not match the score matrix.")
            object.__setattr__(self, 'labels', _frozen(labels, dtype=np.int8))

    @property
    def n_obs(self) -> int:
        return self.scores.shape[0]

    @property
    def n_detectors(self) -> int:
        return self.scores.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.scores[:, self.detector_names.index(name)]


@dataclass(frozen=True)
class NormalizedScores:
    """Score columns min-max mapped into [epsilon, 1 - epsilon]."""

    values: np.ndarray
    epsilon: float
    detector_names: Tuple[str, ...] = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InputError("Normalized scores must be 2-D.")
        if not ((values > 0.0) & (values < 1.0)).all():
            raise InputError("Normalized scores must lie strictly inside (0, 1).")
        object.__setattr__(self, 'values', _frozen(values))
        names = tuple(self.detector_names) or tuple(f"d{j + 1}" for j in range(values.shape[1]))
        object.__setattr__(self, 'detector_names', names)

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_detectors(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LogitScores:
    """Elementwise logit of NormalizedScores."""

    values: np.ndarray
    detector_names: Tuple[str, ...] = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InputError("Logit scores must be 2-D.")
        if not np.isfinite(values).all():
            raise InputError("Logit scores must be finite.")
        object.__setattr__(self, 'values', _frozen(values))
        names = tuple(self.detector_names) or tuple(f"d{j + 1}" for j in range(values.shape[1]))
        object.__setattr__(self, 'detector_names', names)

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_detectors(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class EnsembleResult:
    """One ensemble score per observation plus its provenance."""

    method: str
    scores: np.ndarray
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        scores = np.array(self.scores, dtype=np.float64).reshape(-1)
        if not np.isfinite(scores).all():
            raise InputError(f"{self.method}: ensemble scores must be finite.")
        object.__setattr__(self, 'scores', _frozen(scores))

    def __len__(self) -> int:
        return self.scores.shape[0]


def stack_results(results: Sequence[EnsembleResult]) -> Tuple[Tuple[str, ...], np.ndarray]:
    """Column-stack ensemble outputs, returning (method names, N x m matrix)."""
    names = tuple(result.method for result in results)
    return names, np.column_stack([result.scores for result in results])
