"""
Tidy AUC reports.

An ExperimentReport holds one row per (dataset, method) cell. Synthetic
experiments fill ``iteration`` and ``repetition``; benchmark collections
use ``source`` to group datasets and leave both at 0.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List, Mapping, Sequence

import numpy as np
import pandas as pd

from combiner_app.combiners import METHOD_ORDER
from scoring_app.csv_io import PathLike, write_frame
from scoring_app.exceptions import InputError

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ('experiment', 'source', 'dataset', 'iteration', 'repetition', 'method', 'auc')
SUMMARY_COLUMNS = ('experiment', 'iteration', 'method', 'mean_auc', 'sd_auc', 'n')


def method_rank(method: str) -> int:
    """Position in the fixed method order; unknown names sort after it."""
    return METHOD_ORDER.index(method) if method in METHOD_ORDER else len(METHOD_ORDER)


def ordered_methods(methods: Iterable[str]) -> List[str]:
    return sorted(set(methods), key=lambda name: (method_rank(name), name))


@dataclass(frozen=True)
class ExperimentReport:
    frame: pd.DataFrame

    def __post_init__(self):
        missing = [c for c in REPORT_COLUMNS if c not in self.frame.columns]
        if missing:
            raise InputError(f"Report is missing columns {missing}.")
        frame = self.frame.loc[:, list(REPORT_COLUMNS)].copy()
        if frame['auc'].isna().any() or not frame['auc'].between(0.0, 1.0).all():
            raise InputError("Every AUC in a report must lie in [0, 1].")
        if frame.duplicated(subset=['dataset', 'method']).any():
            raise InputError("A report holds at most one AUC per dataset and method.")
        frame['iteration'] = frame['iteration'].astype(int)
        frame['repetition'] = frame['repetition'].astype(int)
        frame['auc'] = frame['auc'].astype(float)
        frame['_rank'] = frame['method'].map(method_rank)
        frame = frame.sort_values(
            ['experiment', 'source', 'iteration', 'repetition', 'dataset', '_rank', 'method'],
            kind='mergesort',
        )
        object.__setattr__(self, 'frame', frame.drop(columns='_rank').reset_index(drop=True))

    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> 'ExperimentReport':
        return cls(pd.DataFrame.from_records(list(records), columns=list(REPORT_COLUMNS)))

    @classmethod
    def concat(cls, reports: Sequence['ExperimentReport']) -> 'ExperimentReport':
        if not reports:
            return cls.from_records([])
        return cls(pd.concat([r.frame for r in reports], ignore_index=True))

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def methods(self) -> List[str]:
        return ordered_methods(self.frame['method'])

    def subset(self, **filters) -> 'ExperimentReport':
        mask = np.ones(len(self.frame), dtype=bool)
        for column, value in filters.items():
            mask &= (self.frame[column] == value).to_numpy()
        return ExperimentReport(self.frame[mask])

    def only_methods(self, methods: Sequence[str]) -> 'ExperimentReport':
        return ExperimentReport(self.frame[self.frame['method'].isin(methods)])

    def pivot(self) -> pd.DataFrame:
        """Datasets as rows, methods as columns, AUC values."""
        table = self.frame.pivot(index='dataset', columns='method', values='auc')
        order = self.frame.drop_duplicates('dataset')['dataset']
        return table.loc[order, self.methods]

    def missing_cells(self) -> List[tuple]:
        """(dataset, method) pairs absent from an otherwise complete grid."""
        table = self.pivot()
        return [
            (dataset, method)
            for dataset in table.index
            for method in table.columns
            if np.isnan(table.at[dataset, method])
        ]

    def is_complete(self) -> bool:
        return not self.missing_cells()

    def summary(self) -> pd.DataFrame:
        """Mean and SD of AUC per experiment, iteration and method."""
        grouped = self.frame.groupby(['experiment', 'iteration', 'method'], sort=False)['auc']
        table = grouped.agg(mean_auc='mean', sd_auc='std', n='count').reset_index()
        table['sd_auc'] = table['sd_auc'].fillna(0.0)
        table['_rank'] = table['method'].map(method_rank)
        table = table.sort_values(['experiment', 'iteration', '_rank', 'method'], kind='mergesort')
        return table.drop(columns='_rank').reset_index(drop=True).loc[:, list(SUMMARY_COLUMNS)]

    def mean_by_iteration(self, experiment: str) -> pd.DataFrame:
        """Iterations as rows, methods as columns, mean AUC values."""
        table = self.summary()
        table = table[table['experiment'] == experiment]
        wide = table.pivot(index='iteration', columns='method', values='mean_auc')
        return wide.loc[:, [m for m in self.methods if m in wide.columns]]

    def write(self, path: PathLike):
        return write_frame(self.frame, path)

    def write_summary(self, path: PathLike):
        return write_frame(self.summary(), path)
