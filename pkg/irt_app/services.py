import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import pandas as pd

from scoring_app.csv_io import write_frame
from scoring_app.domain import EnsembleResult, NormalizedScores, ScoreMatrix
from scoring_app.utils import DEFAULT_EPSILON, as_normalized, to_logit

from .crm import FitConfig, IrtModel, fit, omega_weights

logger = logging.getLogger(__name__)

IRT = 'IRT'

ITEMS_FILE = 'items.csv'
THETA_FILE = 'theta.csv'


def fit_scores(
    m: Union[ScoreMatrix, NormalizedScores],
    epsilon: float = DEFAULT_EPSILON,
    cfg: Optional[FitConfig] = None,
) -> IrtModel:
    """Normalize, take logits and fit the response model."""
    return fit(to_logit(as_normalized(m, epsilon)), cfg)


def irt_ensemble(
    m: Union[ScoreMatrix, NormalizedScores],
    epsilon: float = DEFAULT_EPSILON,
    cfg: Optional[FitConfig] = None,
) -> EnsembleResult:
    """
    The latent trait of the fitted model as ensemble score.

    ``params`` carries the fitted item table keyed by detector name and the
    model itself for callers that need more than the scores.
    """
    model = fit_scores(m, epsilon, cfg)
    names = model.detector_names
    logger.info(
        "IRT fit: %d items, %d iterations, converged=%s",
        len(names), model.iterations, model.converged,
    )
    return EnsembleResult(
        method=IRT,
        scores=model.theta,
        params={
            'epsilon': epsilon,
            'iterations': model.iterations,
            'converged': model.converged,
            'alpha': dict(zip(names, model.alpha.tolist())),
            'beta': dict(zip(names, model.beta.tolist())),
            'gamma': dict(zip(names, model.gamma.tolist())),
            'model': model,
        },
    )


def items_frame(model: IrtModel) -> pd.DataFrame:
    """One row per detector: name, alpha, beta, gamma, plus the trait weight omega."""
    _, omega = omega_weights(model.items)
    names = model.detector_names or tuple(f"d{j + 1}" for j in range(len(model.items)))
    return pd.DataFrame(
        {
            'detector': names,
            'alpha': model.alpha,
            'beta': model.beta,
            'gamma': model.gamma,
            'omega': omega,
        }
    )


def theta_frame(model: IrtModel) -> pd.DataFrame:
    return pd.DataFrame({'theta': model.theta})


def export_model(model: IrtModel, out_dir: Union[str, Path]) -> Tuple[Path, Path]:
    out_dir = Path(out_dir)
    return (
        write_frame(items_frame(model), out_dir / ITEMS_FILE),
        write_frame(theta_frame(model), out_dir / THETA_FILE),
    )
