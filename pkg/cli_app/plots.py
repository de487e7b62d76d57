"""
Static SVG charts of experiment and benchmark results.

Plots are presentation only; nothing reads them back. The SVG writer is
pinned (fixed id salt, no date stamp) so identical inputs give identical
files.
"""
import logging
from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

logger = logging.getLogger(__name__)

_SVG_STYLE = {'svg.hashsalt': 'irtensemble', 'svg.fonttype': 'none'}


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_SVG_STYLE):
        fig.savefig(path, format='svg', bbox_inches='tight', metadata={'Date': None})
    plt.close(fig)
    logger.debug("Wrote plot %s", path)
    return path


def plot_auc_lines(mean_auc: pd.DataFrame, title: str, path: Path) -> Path:
    """One line per method over iterations; ``mean_auc`` is iterations x methods."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for method in mean_auc.columns:
        ax.plot(mean_auc.index, mean_auc[method], marker='o', markersize=3, label=method)
    ax.set_xlabel('Iteration')
    ax.set_ylabel('Mean AUC')
    ax.set_title(title)
    ax.set_xticks(list(mean_auc.index))
    ax.grid(alpha=0.3)
    ax.legend(fontsize='small', loc='best')
    return _save(fig, path)


def plot_top2_differences(differences: Mapping[str, np.ndarray], path: Path) -> Path:
    """Box plot of best-minus-second AUC differences per source."""
    groups = sorted(differences)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * len(groups) + 2), 4.5))
    if groups:
        ax.boxplot([differences[g] for g in groups], vert=False)
        ax.set_yticks(range(1, len(groups) + 1))
        ax.set_yticklabels(groups)
    ax.set_xlabel('AUC difference (best - second)')
    ax.grid(axis='x', alpha=0.3)
    return _save(fig, path)


def plot_proportions(proportions: pd.DataFrame, path: Path) -> Path:
    """Grouped bars: one group per row of ``proportions`` (methods as columns)."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    proportions.plot.bar(ax=ax, rot=0, width=0.8)
    ax.set_ylabel('Proportion best')
    ax.set_ylim(0.0, 1.0)
    ax.legend(fontsize='small', ncol=2)
    return _save(fig, path)
