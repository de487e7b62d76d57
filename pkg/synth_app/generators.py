"""
Seeded generators for the annulus example and the three iterated
experiments.

Every dataset draws from its own PCG64 stream keyed by
(seed, experiment, iteration, repetition), so cells of an experiment grid
are independent yet reproducible in any order. Normal points come first,
planted anomalies last.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

import numpy as np

from irt_app.crm import ItemParams
from scoring_app.domain import LabeledDataset
from scoring_app.exceptions import InputError

logger = logging.getLogger(__name__)

EXAMPLE = 'EXAMPLE'
EX1 = 'EX1'
EX2 = 'EX2'
EX3 = 'EX3'

EXPERIMENTS = (EXAMPLE, EX1, EX2, EX3)

_STREAM_CODES = {EXAMPLE: 0, EX1: 1, EX2: 2, EX3: 3}
_SIMULATION_STREAM = 99

ANNULUS_RADII = (4.5, 5.5)
N_ANOMALIES = 5


def rng_for(seed: int, stream: int, iteration: int = 0, repetition: int = 0) -> np.random.Generator:
    if min(seed, stream, iteration, repetition) < 0:
        raise InputError("Seeds, iterations and repetitions must be non-negative.")
    entropy = np.random.SeedSequence([seed, stream, iteration, repetition])
    return np.random.Generator(np.random.PCG64(entropy))


def _annulus(rng: np.random.Generator, n: int) -> np.ndarray:
    radius = rng.uniform(*ANNULUS_RADII, size=n)
    angle = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])


def _labeled(normal: np.ndarray, anomalies: np.ndarray, name: str) -> LabeledDataset:
    labels = np.concatenate(
        [np.zeros(len(normal), dtype=np.int8), np.ones(len(anomalies), dtype=np.int8)]
    )
    return LabeledDataset(features=np.vstack([normal, anomalies]), labels=labels, name=name)


def _check_iteration(iteration: int) -> None:
    if iteration < 1:
        raise InputError(f"Iterations are numbered from 1, got {iteration}.")


def gen_example(seed: int, repetition: int = 0, iteration: int = 0) -> LabeledDataset:
    """97 points on an annulus with 3 anomalies drawn from N(0, 0.3^2) at its centre."""
    rng = rng_for(seed, _STREAM_CODES[EXAMPLE], iteration, repetition)
    normal = _annulus(rng, 97)
    anomalies = rng.normal(0.0, 0.3, size=(3, 2))
    return _labeled(normal, anomalies, f"{EXAMPLE}_i{iteration}_s{seed}_r{repetition}")


def gen_ex1(iteration: int, seed: int, repetition: int = 0) -> LabeledDataset:
    """
    400 points from N(0, 1)^6 and 5 anomalies whose first coordinate is
    N(2 + (iteration - 1) / 2, 0.2); the anomalies move away each iteration.
    """
    _check_iteration(iteration)
    rng = rng_for(seed, _STREAM_CODES[EX1], iteration, repetition)
    normal = rng.standard_normal((400, 6))
    anomalies = rng.standard_normal((N_ANOMALIES, 6))
    anomalies[:, 0] = rng.normal(2.0 + (iteration - 1) / 2.0, 0.2, size=N_ANOMALIES)
    return _labeled(normal, anomalies, f"{EX1}_i{iteration}_s{seed}_r{repetition}")


def gen_ex2(iteration: int, seed: int, repetition: int = 0) -> LabeledDataset:
    """
    800 points on an annulus in the first two coordinates and N(0, 1) in
    the other two; 5 anomalies start on the annulus at x1 = 5 and move
    into its hole by 0.5 per iteration.
    """
    _check_iteration(iteration)
    rng = rng_for(seed, _STREAM_CODES[EX2], iteration, repetition)
    normal = np.column_stack([_annulus(rng, 800), rng.standard_normal((800, 2))])
    anomalies = np.column_stack(
        [
            rng.normal(5.0 - (iteration - 1) / 2.0, 0.1, size=N_ANOMALIES),
            rng.normal(0.0, 0.1, size=N_ANOMALIES),
            rng.standard_normal((N_ANOMALIES, 2)),
        ]
    )
    return _labeled(normal, anomalies, f"{EX2}_i{iteration}_s{seed}_r{repetition}")


def gen_ex3(iteration: int, seed: int, repetition: int = 0) -> LabeledDataset:
    """
    Two modes at x1 = -5 and x1 = +5 (400 points each, SD 1) in six
    dimensions; 5 anomalies with x1 ~ N(3 - 0.3 (iteration - 1), 0.2)
    drift into the trough between them.
    """
    _check_iteration(iteration)
    rng = rng_for(seed, _STREAM_CODES[EX3], iteration, repetition)
    normal = rng.standard_normal((800, 6))
    normal[:400, 0] -= 5.0
    normal[400:, 0] += 5.0
    anomalies = rng.standard_normal((N_ANOMALIES, 6))
    anomalies[:, 0] = rng.normal(3.0 - 0.3 * (iteration - 1), 0.2, size=N_ANOMALIES)
    return _labeled(normal, anomalies, f"{EX3}_i{iteration}_s{seed}_r{repetition}")


def generate(experiment: str, iteration: int, seed: int, repetition: int = 0) -> LabeledDataset:
    experiment = experiment.upper()
    if experiment == EXAMPLE:
        return gen_example(seed, repetition=repetition, iteration=iteration)
    generators = {EX1: gen_ex1, EX2: gen_ex2, EX3: gen_ex3}
    if experiment not in generators:
        raise InputError(f"Unknown experiment '{experiment}', expected one of {EXPERIMENTS}.")
    return generators[experiment](iteration, seed, repetition=repetition)


@dataclass(frozen=True)
class ExperimentSpec:
    """
    A grid of iterations x repetitions for one experiment.

    The annulus example has no difficulty schedule; its iterations are
    plain regenerations.
    """

    experiment: str
    iterations: int = 10
    repetitions: int = 10
    seed: int = 0

    def __post_init__(self):
        experiment = self.experiment.upper()
        if experiment not in EXPERIMENTS:
            raise InputError(
                f"Unknown experiment '{self.experiment}', expected one of {EXPERIMENTS}."
            )
        if self.iterations < 1 or self.repetitions < 1:
            raise InputError("iterations and repetitions must both be at least 1.")
        if self.seed < 0:
            raise InputError(f"seed must be non-negative, got {self.seed}.")
        object.__setattr__(self, 'experiment', experiment)

    def cells(self) -> Iterator[Tuple[int, int]]:
        for iteration in range(1, self.iterations + 1):
            for repetition in range(1, self.repetitions + 1):
                yield iteration, repetition

    def dataset(self, iteration: int, repetition: int) -> LabeledDataset:
        return generate(self.experiment, iteration, self.seed, repetition)


def draw_items(n_items: int, seed: int) -> Tuple[ItemParams, ...]:
    """Item parameters with alpha ~ U(1.5, 3), beta ~ U(-1, 1), gamma ~ U(0.5, 1.5)."""
    rng = rng_for(seed, _SIMULATION_STREAM, 0, 0)
    alpha = rng.uniform(1.5, 3.0, size=n_items)
    beta = rng.uniform(-1.0, 1.0, size=n_items)
    gamma = rng.uniform(0.5, 1.5, size=n_items)
    return tuple(ItemParams(float(a), float(b), float(g)) for a, b, g in zip(alpha, beta, gamma))


def simulate_crm(
    items: Sequence[ItemParams], n_obs: int, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw theta ~ N(0, 1) and logit responses from the continuous response
    model, z = (theta - beta - e / alpha) / gamma with e ~ N(0, 1).

    Returns (z, theta).
    """
    if n_obs < 2:
        raise InputError(f"n_obs must be at least 2, got {n_obs}.")
    rng = rng_for(seed, _SIMULATION_STREAM, 1, 0)
    theta = rng.standard_normal(n_obs)
    alpha = np.array([item.alpha for item in items])
    beta = np.array([item.beta for item in items])
    gamma = np.array([item.gamma for item in items])
    noise = rng.standard_normal((n_obs, len(items)))
    z = (theta[:, None] - beta - noise / alpha) / gamma
    return z, theta
