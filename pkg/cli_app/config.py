"""
Run configuration: a flat ``key=value`` file merged with command-line
flags, flags winning.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from decouple import RepositoryEnv

from combiner_app.affinity import AffinityConfig
from combiner_app.combiners import GreedyConfig
from detector_app.detectors import DetectorConfig
from irt_app.crm import FitConfig
from scoring_app.exceptions import InputError

from .runner import ScoringPlan
from .serializers import RunConfigSerializer

logger = logging.getLogger(__name__)

CONFIG_KEYS = tuple(RunConfigSerializer().fields)


@dataclass(frozen=True)
class RunConfig:
    regime: Optional[str]
    k: Optional[int]
    k_min: Optional[int]
    k_max: Optional[int]
    h: float
    c: float
    algorithm: str
    epsilon: float
    kappa: int
    kappa_range: Tuple[int, int]
    max_iter: int
    tol: float
    strict: bool
    damping: float
    ap_max_iter: int
    ap_convergence_iter: int
    seed: int
    out_dir: str
    jobs: int

    @property
    def plan(self) -> ScoringPlan:
        return ScoringPlan(
            regime=self.regime,
            k=self.k,
            k_min=self.k_min,
            k_max=self.k_max,
            h=self.h,
            c=self.c,
            algorithm=self.algorithm,
            epsilon=self.epsilon,
            greedy=self.greedy,
            fit=self.fit,
            affinity=self.affinity,
        )

    def detector_config(self, n_obs: int) -> DetectorConfig:
        """Neighborhood sizes for a dataset of ``n_obs`` rows."""
        return self.plan.detector_config(n_obs)

    @property
    def greedy(self) -> GreedyConfig:
        return GreedyConfig(kappa=self.kappa, kappa_range=self.kappa_range)

    @property
    def fit(self) -> FitConfig:
        return FitConfig(max_iter=self.max_iter, tol=self.tol, strict=self.strict)

    @property
    def affinity(self) -> AffinityConfig:
        return AffinityConfig(
            damping=self.damping,
            max_iter=self.ap_max_iter,
            convergence_iter=self.ap_convergence_iter,
        )

    @property
    def output_path(self) -> Path:
        return Path(self.out_dir)

    def as_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['kappa_range'] = list(self.kappa_range)
        return data


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Read ``key=value`` lines; ``#`` comments and blank lines are skipped."""
    try:
        data = dict(RepositoryEnv(str(path)).data)
    except FileNotFoundError as exc:
        raise InputError(f"Config file not found: {path}") from exc
    normalized = {key.strip().lower().replace('-', '_'): value for key, value in data.items()}
    unknown = sorted(set(normalized) - set(CONFIG_KEYS))
    if unknown:
        raise InputError(f"{path}: unknown config keys {unknown}.")
    return normalized


def build_config(
    path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """
    Merge the config file (if any) with ``overrides``; ``None`` overrides
    leave the file value or the default in place.
    """
    data: Dict[str, Any] = read_config_file(path) if path else {}
    for key, value in (overrides or {}).items():
        if key in CONFIG_KEYS and value is not None:
            data[key] = value
    if isinstance(data.get('regime'), str):
        data['regime'] = data['regime'].strip().lower() or None
    serializer = RunConfigSerializer(data=data)
    if not serializer.is_valid():
        raise InputError(f"Invalid run configuration: {_flatten(serializer.errors)}")
    cfg = RunConfig(**{key: serializer.validated_data.get(key) for key in CONFIG_KEYS})
    logger.debug("Run configuration: %s", cfg.as_dict())
    return cfg


def _flatten(errors) -> str:
    parts = []
    for field, messages in errors.items():
        text = '; '.join(str(m) for m in messages) if isinstance(messages, list) else str(messages)
        parts.append(text if field == 'non_field_errors' else f"{field}: {text}")
    return ' | '.join(parts)
