"""Comparison optimizers: simulated annealing and an elitist real-coded GA.

Both report best-so-far values in the same :class:`~asoc.core.RunTrace`
format as ASOC, one record per outer iteration / generation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from asoc.core import (
    IterationRecord,
    ObjectiveEvaluator,
    RunTrace,
    Status,
    evaluate_points,
    make_rng,
)

__all__ = [
    "GaConfig",
    "SaConfig",
    "blx_crossover",
    "ga_run",
    "metropolis_accept",
    "sa_run",
    "sa_temperature",
]


@dataclass
class SaConfig:
    outer_iterations: int = 2000
    samples_per_temperature: int = 50
    initial_temperature: float = 10.0
    neighbor_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.outer_iterations < 1 or self.samples_per_temperature < 1:
            raise ValueError("iteration counts must be positive")
        if not self.initial_temperature > 0:
            raise ValueError("initial_temperature must be positive")
        if not self.neighbor_scale > 0:
            raise ValueError("neighbor_scale must be positive")


@dataclass
class GaConfig:
    population_size: int = 30
    generations: int = 2000
    crossover_probability: float = 0.9
    mutation_probability: float = 0.05
    mutation_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.generations < 1:
            raise ValueError("generations must be positive")
        for p in (self.crossover_probability, self.mutation_probability):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        if not self.mutation_scale > 0:
            raise ValueError("mutation_scale must be positive")


def sa_temperature(k: int, initial_temperature: float) -> float:
    """Logarithmic schedule for outer iteration ``k >= 1``, with ``T_1 = T0``."""
    return initial_temperature / math.log(k - 1 + math.e)


def metropolis_accept(delta: float, temperature: float, rng: np.random.Generator) -> bool:
    """Always accept downhill moves, uphill ones with probability ``exp(-delta/T)``."""
    if delta <= 0:
        return True
    return bool(rng.random() < math.exp(-delta / temperature))


def sa_run(objective: ObjectiveEvaluator, config: SaConfig) -> tuple[NDArray, float, RunTrace]:
    """Simulated annealing with Gaussian neighbours and a logarithmic schedule.

    At outer iteration ``k`` the temperature is held at :func:`sa_temperature`
    for ``samples_per_temperature`` Metropolis moves. Proposals are the
    current point plus N(0, (neighbor_scale * width)^2) per coordinate,
    clipped into the box. The schedule always spans ``outer_iterations``.
    """
    rng = make_rng(config.seed)
    domain = objective.domain
    sigma = config.neighbor_scale * domain.width

    current = domain.sample(rng, 1)[0]
    current_f = evaluate_points(objective, current[None, :])[0]
    best, best_f = current.copy(), current_f
    evaluations = 1
    trace = RunTrace()
    for k in range(1, config.outer_iterations + 1):
        temperature = sa_temperature(k, config.initial_temperature)
        visited = 0.0
        for _ in range(config.samples_per_temperature):
            proposal = domain.clip(current + sigma * rng.standard_normal(domain.dimension))
            f = evaluate_points(objective, proposal[None, :])[0]
            evaluations += 1
            if metropolis_accept(f - current_f, temperature, rng):
                current, current_f = proposal, f
                if f < best_f:
                    best, best_f = proposal.copy(), f
            visited += current_f
        trace.records.append(
            IterationRecord(
                iteration=k,
                best_f=float(best_f),
                best_x=best.copy(),
                pool_mean_f=visited / config.samples_per_temperature,
                evaluations=evaluations,
            )
        )
    trace.status = Status.MAX_ITERS
    return best, float(best_f), trace


def blx_crossover(
    a: NDArray, b: NDArray, rng: np.random.Generator, alpha: float = 0.5
) -> NDArray:
    """BLX-alpha: each gene uniform on the parents' interval widened by ``alpha`` per side."""
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    span = hi - lo
    return rng.uniform(lo - alpha * span, hi + alpha * span)


def _tournament(values: NDArray, rng: np.random.Generator) -> int:
    i, j = rng.integers(0, values.shape[0], size=2)
    return int(i if values[i] <= values[j] else j)


def ga_run(objective: ObjectiveEvaluator, config: GaConfig) -> tuple[NDArray, float, RunTrace]:
    """Generational real-coded GA with single-individual elitism.

    Each generation keeps the incumbent best unchanged and breeds
    ``population_size - 1`` children: two binary-tournament parents, BLX-0.5
    crossover with probability ``crossover_probability`` (otherwise a copy of
    the first parent), then per-gene Gaussian mutation with probability
    ``mutation_probability`` and std ``mutation_scale * width``, clipped into
    the box.
    """
    rng = make_rng(config.seed)
    domain = objective.domain
    size = config.population_size
    sigma = config.mutation_scale * domain.width

    pop = domain.sample(rng, size)
    values = evaluate_points(objective, pop)
    evaluations = size
    trace = RunTrace()
    for gen in range(1, config.generations + 1):
        elite = int(np.argmin(values))
        children = np.empty((size - 1, domain.dimension))
        for c in range(size - 1):
            p1 = pop[_tournament(values, rng)]
            p2 = pop[_tournament(values, rng)]
            if rng.random() < config.crossover_probability:
                child = blx_crossover(p1, p2, rng)
            else:
                child = p1.copy()
            mask = rng.random(domain.dimension) < config.mutation_probability
            child = child + mask * sigma * rng.standard_normal(domain.dimension)
            children[c] = domain.clip(child)
        child_values = evaluate_points(objective, children)
        evaluations += size - 1
        pop = np.vstack([pop[elite][None, :], children])
        values = np.concatenate([[values[elite]], child_values])
        best = int(np.argmin(values))
        trace.records.append(
            IterationRecord(
                iteration=gen,
                best_f=float(values[best]),
                best_x=pop[best].copy(),
                pool_mean_f=float(values.mean()),
                evaluations=evaluations,
            )
        )
    trace.status = Status.MAX_ITERS
    best = int(np.argmin(values))
    return pop[best].copy(), float(values[best]), trace
