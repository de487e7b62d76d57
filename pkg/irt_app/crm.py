"""
Continuous response model and its EM fit.

Each detector j is an item with discrimination alpha, difficulty beta and
scaling gamma. Given the latent trait theta of observation i, the logit
score z_ij has density

    f(z | theta) = |alpha gamma| / sqrt(2 pi) * exp(-alpha^2 / 2 * (theta - beta - gamma z)^2)

so that gamma z is Gaussian around theta - beta with precision alpha^2.
Traits follow a standard normal prior during estimation; the reported
trait is the prior-free weighted combination returned by latent_trait.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import norm

from scoring_app.domain import LogitScores
from scoring_app.exceptions import InputError, NumericalError

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-6

_LOG_2PI = math.log(2.0 * math.pi)
# caps alpha at 1e6 when a column reproduces the trait exactly
_MIN_SPREAD = 1e-12
# growth factor of the extrapolation step cap
_STEP_GROWTH = 4.0

Responses = Union[LogitScores, np.ndarray]


@dataclass(frozen=True)
class ItemParams:
    """
    Parameters of one detector.

    Attributes:
        alpha: discrimination; small values discount the detector.
        beta: difficulty, the detector's anomalousness threshold.
        gamma: scaling applied to the logit score. alpha * gamma > 0.
    """

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        values = (self.alpha, self.beta, self.gamma)
        if not all(math.isfinite(v) for v in values):
            raise InputError(f"Item parameters must be finite, got {values}.")
        if not self.alpha * self.gamma > 0:
            raise InputError(
                f"alpha * gamma must be positive, got alpha={self.alpha}, gamma={self.gamma}."
            )

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.alpha, self.beta, self.gamma


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL
    init_alpha: float = 1.0
    init_beta: float = 0.0
    init_gamma: float = 1.0
    # raise NumericalError instead of returning an unconverged model
    strict: bool = False

    def __post_init__(self):
        if self.max_iter < 1:
            raise InputError(f"max_iter must be at least 1, got {self.max_iter}.")
        if not self.tol > 0:
            raise InputError(f"tol must be positive, got {self.tol}.")
        ItemParams(self.init_alpha, self.init_beta, self.init_gamma)

    def initial_items(self, n_items: int) -> Tuple[ItemParams, ...]:
        return tuple(
            ItemParams(self.init_alpha, self.init_beta, self.init_gamma) for _ in range(n_items)
        )


@dataclass(frozen=True)
class IrtModel:
    """
    A fitted model.

    ``posterior_mean`` and ``posterior_sd`` come from the E-step that fed
    the final M-step, so ``items`` maximize expected_log_likelihood at them.
    """

    items: Tuple[ItemParams, ...]
    theta: np.ndarray
    posterior_mean: np.ndarray
    posterior_sd: float
    log_likelihood_trace: Tuple[float, ...]
    iterations: int
    converged: bool
    detector_names: Tuple[str, ...] = field(default=())

    @property
    def alpha(self) -> np.ndarray:
        return np.array([item.alpha for item in self.items])

    @property
    def beta(self) -> np.ndarray:
        return np.array([item.beta for item in self.items])

    @property
    def gamma(self) -> np.ndarray:
        return np.array([item.gamma for item in self.items])


def _responses(z: Responses) -> np.ndarray:
    values = z.values if isinstance(z, LogitScores) else np.asarray(z, dtype=np.float64)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    if values.ndim != 2:
        raise InputError("Logit responses must be a 2-D matrix.")
    return values


def _arrays(items: Sequence[ItemParams]):
    params = np.array([item.as_tuple() for item in items], dtype=np.float64).reshape(-1, 3)
    return params[:, 0], params[:, 1], params[:, 2]


def crm_density(z, theta, item: ItemParams):
    """f(z | theta) for one item; broadcasts over array inputs."""
    residual = np.asarray(theta) - item.beta - item.gamma * np.asarray(z)
    return abs(item.gamma) * norm.pdf(residual, scale=1.0 / abs(item.alpha))


def e_step(z: Responses, items: Sequence[ItemParams]) -> Tuple[np.ndarray, float]:
    """
    Gaussian posterior of every theta_i under a N(0, 1) prior.

    Returns the N posterior means and the posterior standard deviation,
    which is shared by all observations.
    """
    values = _responses(z)
    if not items:
        return np.zeros(values.shape[0]), 1.0
    alpha, beta, gamma = _arrays(items)
    if values.shape[1] != alpha.size:
        raise InputError(f"{values.shape[1]} response columns for {alpha.size} items.")
    weight = alpha ** 2
    precision = 1.0 + weight.sum()
    mu = (weight * (beta + gamma * values)).sum(axis=1) / precision
    return mu, 1.0 / math.sqrt(precision)


def m_step(
    z: Responses, mu: np.ndarray, sigma: float, prev: Sequence[ItemParams]
) -> Tuple[ItemParams, ...]:
    """
    Maximize the expected complete-data log-likelihood item by item.

    The stationary point of the objective in (alpha, beta, gamma) is

        gamma = (S_mm + N sigma^2) / S_zm
        beta  = mean(mu) - gamma * mean(z)
        alpha^2 = N / sum((beta + gamma z - mu)^2 + sigma^2)

    where S_mm and S_zm are centred sums of squares and cross-products.
    alpha then takes the sign of gamma. Items whose column is constant or
    uncorrelated with mu keep their previous parameters.
    """
    values = _responses(z)
    mu = np.asarray(mu, dtype=np.float64)
    n_obs, n_items = values.shape
    if len(prev) != n_items:
        raise InputError(f"{n_items} response columns for {len(prev)} items.")
    if n_obs < 2:
        raise InputError("At least 2 observations are required to fit items.")
    spread_mu = mu - mu.mean()
    s_mm = float(spread_mu @ spread_mu)
    variance = sigma ** 2

    updated = []
    for j in range(n_items):
        column = values[:, j]
        spread_z = column - column.mean()
        s_zm = float(spread_z @ spread_mu)
        if np.ptp(column) == 0.0 or s_zm == 0.0:
            logger.warning("Item %d has no information about the trait; keeping %s.", j, prev[j])
            updated.append(prev[j])
            continue
        gamma = (s_mm + n_obs * variance) / s_zm
        beta = mu.mean() - gamma * column.mean()
        residual = beta + gamma * column - mu
        spread = max(float(residual @ residual) + n_obs * variance, n_obs * _MIN_SPREAD)
        alpha = math.copysign(math.sqrt(n_obs / spread), gamma)
        updated.append(ItemParams(alpha=alpha, beta=beta, gamma=gamma))
    return tuple(updated)


def expected_log_likelihood(
    z: Responses, mu: np.ndarray, sigma: float, items: Sequence[ItemParams]
) -> float:
    """
    Expected complete-data log-likelihood over the Gaussian posterior
    N(mu_i, sigma^2), with a flat prior on the item parameters.
    """
    values = _responses(z)
    alpha, beta, gamma = _arrays(items)
    residual = np.asarray(mu)[:, None] - beta - gamma * values
    per_cell = (
        np.log(np.abs(alpha))
        + np.log(np.abs(gamma))
        - 0.5 * _LOG_2PI
        - 0.5 * alpha ** 2 * (residual ** 2 + sigma ** 2)
    )
    return float(per_cell.sum())


def marginal_log_likelihood(z: Responses, items: Sequence[ItemParams]) -> float:
    """
    Observed-data log-likelihood with theta integrated out against N(0, 1).

    Each row of z is multivariate normal with covariance
    diag(1 / (alpha gamma)^2) + (1/gamma)(1/gamma)^T; the determinant and
    quadratic form follow from the matrix determinant lemma and Woodbury.
    """
    values = _responses(z)
    alpha, beta, gamma = _arrays(items)
    n_items = alpha.size
    weight = alpha ** 2
    precision = 1.0 + weight.sum()
    shifted = beta + gamma * values
    log_det = -np.log(weight * gamma ** 2).sum() + math.log(precision)
    quad = (weight * shifted ** 2).sum(axis=1) - (weight * shifted).sum(axis=1) ** 2 / precision
    rows = -0.5 * n_items * _LOG_2PI - 0.5 * log_det - 0.5 * quad
    return float(rows.sum())


def latent_trait(z: Responses, items: Sequence[ItemParams]) -> np.ndarray:
    """theta_i = sum_j alpha_j^2 (beta_j + gamma_j z_ij) / sum_j alpha_j^2."""
    values = _responses(z)
    alpha, beta, gamma = _arrays(items)
    weight = alpha ** 2
    total = weight.sum()
    if total == 0.0:
        raise NumericalError("Every item has zero discrimination; the trait is undefined.")
    return (weight * (beta + gamma * values)).sum(axis=1) / total


def omega_weights(items: Sequence[ItemParams]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split the latent trait into per-detector intercepts and weights:
    theta_i = sum_j (zeta_j + omega_j z_ij).
    """
    alpha, beta, gamma = _arrays(items)
    weight = alpha ** 2
    total = weight.sum()
    if total == 0.0:
        raise NumericalError("Every item has zero discrimination; the trait is undefined.")
    return weight * beta / total, weight * gamma / total


def _max_change(old: Sequence[ItemParams], new: Sequence[ItemParams]) -> float:
    return float(np.abs(_flatten(new) - _flatten(old)).max())


def _flatten(items: Sequence[ItemParams]) -> np.ndarray:
    return np.array([item.as_tuple() for item in items], dtype=np.float64).reshape(-1)


def _unflatten(vector: np.ndarray) -> Optional[Tuple[ItemParams, ...]]:
    """Items from a flat parameter vector; None when it leaves the valid region."""
    params = vector.reshape(-1, 3)
    if not np.isfinite(params).all() or (params[:, [0, 2]] == 0.0).any():
        return None
    alpha = np.copysign(np.abs(params[:, 0]), params[:, 2])
    return tuple(
        ItemParams(float(a), float(b), float(g))
        for a, b, g in zip(alpha, params[:, 1], params[:, 2])
    )


def _standardize(
    items: Sequence[ItemParams], mu: np.ndarray, sigma: float
) -> Tuple[Tuple[ItemParams, ...], np.ndarray, float]:
    """
    Parameter expansion of the trait prior.

    The prior is refit as N(m, tau^2) from the posterior moments and the
    model is mapped back to a standard normal trait through
    alpha' = alpha tau, beta' = (beta - m) / tau, gamma' = gamma / tau.
    The mapped model has the same marginal likelihood, and the item part of
    the expected log-likelihood is unchanged at the mapped moments.
    """
    m = float(mu.mean())
    tau = math.sqrt(float(((mu - m) ** 2).mean()) + sigma ** 2)
    mapped = tuple(
        ItemParams(item.alpha * tau, (item.beta - m) / tau, item.gamma / tau) for item in items
    )
    return mapped, (mu - m) / tau, sigma / tau


def em_update(
    z: Responses, items: Sequence[ItemParams]
) -> Tuple[Tuple[ItemParams, ...], np.ndarray, float]:
    """
    One E-step and M-step followed by the parameter-expansion map.

    Returns the updated items and the posterior moments they maximize
    expected_log_likelihood at.
    """
    values = _responses(z)
    mu, sigma = e_step(values, items)
    return _standardize(m_step(values, mu, sigma, items), mu, sigma)


@dataclass
class _Iterate:
    items: Tuple[ItemParams, ...]
    mu: np.ndarray
    sigma: float
    loglik: float


def _accelerated_cycle(
    values: np.ndarray, current: _Iterate, step_cap: float, tol: float
) -> Tuple[_Iterate, float]:
    """
    One squared-extrapolation cycle over em_update.

    Two plain updates give r = p1 - p0 and v = p2 - 2 p1 + p0; the jump
    p0 + 2 s r + s^2 v with s = |r| / |v| clipped to [1, step_cap] is
    stabilized by one more update. The cycle falls back to p2 whenever the
    jump leaves the valid region or lowers the marginal likelihood below
    that of p0. The cap grows after a jump at the cap and shrinks after a
    rejected one.
    """
    items, mu, sigma = em_update(values, current.items)
    first = _Iterate(items, mu, sigma, marginal_log_likelihood(values, items))
    if _max_change(current.items, first.items) < tol:
        return first, step_cap
    items, mu, sigma = em_update(values, first.items)
    second = _Iterate(items, mu, sigma, marginal_log_likelihood(values, items))

    start, middle = _flatten(current.items), _flatten(first.items)
    r = middle - start
    v = _flatten(second.items) - middle - r
    v_norm = float(np.linalg.norm(v))
    if v_norm == 0.0:
        return second, step_cap
    step = min(max(float(np.linalg.norm(r)) / v_norm, 1.0), step_cap)
    if step == 1.0:
        # a unit step lands on p2 itself
        if step == step_cap:
            step_cap *= _STEP_GROWTH
        return second, step_cap

    jumped = _unflatten(start + 2.0 * step * r + step ** 2 * v)
    if jumped is not None:
        try:
            items, mu, sigma = em_update(values, jumped)
            landed = _Iterate(items, mu, sigma, marginal_log_likelihood(values, items))
        except InputError:
            landed = None
        if landed is not None and math.isfinite(landed.loglik) and landed.loglik >= current.loglik:
            if step == step_cap:
                step_cap *= _STEP_GROWTH
            return landed, step_cap
    if step == step_cap:
        step_cap = max(1.0, step_cap / _STEP_GROWTH)
    logger.debug("Extrapolation rejected at step %.3g", step)
    return second, step_cap


def fit(z: Responses, cfg: Optional[FitConfig] = None) -> IrtModel:
    """
    Fit item parameters by EM and return the model with its latent traits.

    The first iteration is an M-step from the row means of z. Every later
    iteration is one accelerated cycle over em_update, which never lowers
    the marginal likelihood. Iterations stop once the largest change over
    all 3n item parameters falls below ``cfg.tol``. The trace records the
    marginal log-likelihood after every iteration.
    """
    cfg = cfg or FitConfig()
    detector_names = z.detector_names if isinstance(z, LogitScores) else ()
    values = _responses(z)
    n_obs, n_items = values.shape
    if n_obs < 2:
        raise InputError(f"At least 2 observations are required, got {n_obs}.")
    informative = int((np.ptp(values, axis=0) > 0).sum())
    if informative == 0:
        raise InputError("Every response column is constant; nothing to fit.")
    if n_items < 2 or informative < 2:
        logger.warning(
            "Fitting with %d items of which %d are informative.", n_items, informative
        )

    initial = cfg.initial_items(n_items)
    mu = values.mean(axis=1)
    sigma = 1.0 / math.sqrt(1.0 + n_items)
    items = m_step(values, mu, sigma, initial)
    current = _Iterate(items, mu, sigma, marginal_log_likelihood(values, items))
    change = _max_change(initial, items)
    trace = [current.loglik]
    iteration = 1
    step_cap = 1.0
    logger.debug("EM iteration 1: change=%.3e, loglik=%.6f", change, current.loglik)
    while change >= cfg.tol and iteration < cfg.max_iter:
        iteration += 1
        previous = current
        current, step_cap = _accelerated_cycle(values, previous, step_cap, cfg.tol)
        change = _max_change(previous.items, current.items)
        trace.append(current.loglik)
        logger.debug(
            "EM iteration %d: change=%.3e, loglik=%.6f", iteration, change, current.loglik
        )
    converged = change < cfg.tol

    if not converged:
        message = f"EM did not converge in {cfg.max_iter} iterations (tol={cfg.tol})."
        if cfg.strict:
            raise NumericalError(message)
        logger.warning(message)

    return IrtModel(
        items=current.items,
        theta=latent_trait(values, current.items),
        posterior_mean=current.mu,
        posterior_sd=current.sigma,
        log_likelihood_trace=tuple(trace),
        iterations=iteration,
        converged=converged,
        detector_names=tuple(detector_names),
    )
