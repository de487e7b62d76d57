"""
CSV reading and writing for datasets, score matrices and ensemble outputs.

Schema: a header row, comma separated, UTF-8, ``.`` as decimal point, and
an optional final ``label`` column holding 0/1. Floats are written with
pandas' shortest round-trip representation and read back with the
round-trip parser, so re-emitting a file read from disk is byte-identical.
"""
import logging
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd

from .domain import EnsembleResult, LabeledDataset, ScoreMatrix, stack_results
from .exceptions import InputError

logger = logging.getLogger(__name__)

LABEL_COLUMN = 'label'

PathLike = Union[str, Path]


def _read_frame(path: PathLike) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, encoding='utf-8', float_precision='round_trip')
    except FileNotFoundError as exc:
        raise InputError(f"File not found: {path}") from exc
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise InputError(f"Could not parse CSV {path}: {exc}") from exc
    if frame.shape[1] == 0:
        raise InputError(f"{path}: no columns found.")
    return frame


def _split_labels(frame: pd.DataFrame, path: PathLike):
    labels = None
    if frame.columns[-1] == LABEL_COLUMN:
        raw = frame[LABEL_COLUMN]
        if raw.isna().any() or not raw.isin([0, 1]).all():
            raise InputError(f"{path}: the label column must contain only 0 and 1.")
        labels = raw.to_numpy(dtype=np.int8)
        frame = frame.drop(columns=[LABEL_COLUMN])
    non_numeric = [c for c in frame.columns if not pd.api.types.is_numeric_dtype(frame[c])]
    if non_numeric:
        raise InputError(f"{path}: non-numeric columns {non_numeric}.")
    return frame, labels


def read_dataset(path: PathLike, name: str = '') -> LabeledDataset:
    frame, labels = _split_labels(_read_frame(path), path)
    if frame.isna().any().any():
        column = frame.columns[frame.isna().any()][0]
        raise InputError(f"{path}: missing values in column '{column}'.")
    return LabeledDataset(
        features=frame.to_numpy(dtype=np.float64),
        labels=labels,
        name=name or Path(path).stem,
        feature_names=tuple(str(c) for c in frame.columns),
    )


def write_dataset(ds: LabeledDataset, path: PathLike) -> Path:
    frame = pd.DataFrame(ds.features, columns=list(ds.feature_names))
    if ds.labels is not None:
        frame[LABEL_COLUMN] = ds.labels.astype(int)
    return _write_frame(frame, path)


def read_score_matrix(path: PathLike) -> ScoreMatrix:
    frame, labels = _split_labels(_read_frame(path), path)
    if frame.isna().any().any():
        column = frame.columns[frame.isna().any()][0]
        raise InputError(f"Detector column '{column}' contains missing scores.")
    return ScoreMatrix(
        scores=frame.to_numpy(dtype=np.float64),
        detector_names=tuple(str(c) for c in frame.columns),
        labels=labels,
    )


def write_score_matrix(m: ScoreMatrix, path: PathLike) -> Path:
    frame = pd.DataFrame(m.scores, columns=list(m.detector_names))
    if m.labels is not None:
        frame[LABEL_COLUMN] = m.labels.astype(int)
    return _write_frame(frame, path)


def write_ensemble_results(results: Sequence[EnsembleResult], path: PathLike) -> Path:
    """One column per ensemble method, in the order given."""
    names, matrix = stack_results(results)
    return _write_frame(pd.DataFrame(matrix, columns=list(names)), path)


def write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    return _write_frame(frame, path)


def _write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, encoding='utf-8', lineterminator='\n')
    logger.debug("Wrote %d rows to %s", len(frame), path)
    return path
