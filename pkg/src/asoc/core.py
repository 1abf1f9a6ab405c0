"""The ASOC optimization loop.

A pool of N points is kept sorted by objective value. Each iteration fits a
Gaussian to the class of ordered pairs ``[x_better, x_worse]`` drawn from the
pool, conditions it on the worse element being the current best point, and
samples N candidates from the result. Candidates are clipped into the box,
evaluated, merged with the pool, and the best N survive.

There are no step sizes, temperatures or operator probabilities to tune; the
sampling distribution is entirely determined by the pool.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Protocol, runtime_checkable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from asoc import linalg

__all__ = [
    "AsocConfig",
    "BoxDomain",
    "EvaluationError",
    "IterationRecord",
    "Objective",
    "ObjectiveEvaluator",
    "Population",
    "RunTrace",
    "Status",
    "continue_with",
    "evaluate_points",
    "initialize",
    "make_rng",
    "run",
    "step",
]

logger = logging.getLogger(__name__)


class EvaluationError(RuntimeError):
    """The objective returned a non-finite value."""

    def __init__(self, point: NDArray, value: float):
        self.point = np.array(point, copy=True)
        self.value = value
        super().__init__(f"objective returned {value!r} at point {self.point.tolist()}")


class Status:
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    DEGENERATE_HALT = "degenerate_halt"


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box ``lower <= x <= upper``."""

    lower: NDArray
    upper: NDArray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper bounds must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("bounds must be finite")
        if np.any(lower >= upper):
            raise ValueError("every lower bound must be strictly below its upper bound")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def cube(cls, low: float, high: float, dimension: int) -> "BoxDomain":
        return cls(np.full(dimension, float(low)), np.full(dimension, float(high)))

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def width(self) -> NDArray:
        return self.upper - self.lower

    def clip(self, points: ArrayLike) -> NDArray:
        return np.clip(np.asarray(points, dtype=float), self.lower, self.upper)

    def contains(self, points: ArrayLike) -> bool:
        p = np.asarray(points, dtype=float)
        return bool(np.all(p >= self.lower) and np.all(p <= self.upper))

    def sample(self, rng: np.random.Generator, count: int) -> NDArray:
        return rng.uniform(self.lower, self.upper, size=(count, self.dimension))

    def __eq__(self, other):
        if not isinstance(other, BoxDomain):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))


@runtime_checkable
class ObjectiveEvaluator(Protocol):
    """Anything with a box domain that maps a point to a real value.

    Only point evaluation is ever requested; there is no gradient access.
    """

    domain: BoxDomain

    def __call__(self, x: NDArray) -> float: ...


@dataclass(frozen=True)
class Objective:
    """Wrap a plain callable and a box into an :class:`ObjectiveEvaluator`."""

    func: Callable[[NDArray], float]
    domain: BoxDomain
    name: str = "objective"

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    def __call__(self, x: NDArray) -> float:
        return float(self.func(x))


def evaluate_points(objective: ObjectiveEvaluator, points: NDArray) -> NDArray:
    """Evaluate each row; raise :class:`EvaluationError` on a non-finite value."""
    values = np.empty(points.shape[0])
    for i, p in enumerate(points):
        v = float(objective(p))
        if not np.isfinite(v):
            raise EvaluationError(p, v)
        values[i] = v
    return values


@dataclass
class AsocConfig:
    """Run settings.

    ``cov_floor`` adds ``cov_floor * width_k**2`` to the variance of each
    coordinate of the candidate distribution (``width_k`` the box width), so
    it is a fraction of the squared box size; 0 keeps the pure algorithm.
    """

    pool_size: int = 30
    max_iters: int = 2000
    regularization: float = 1e-10
    cov_floor: float = 0.0
    stop_tolerance: float = 1e-12
    stop_patience: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.pool_size < 2:
            raise ValueError("pool_size must be at least 2 so that pairs exist")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.regularization < 0 or self.cov_floor < 0 or self.stop_tolerance < 0:
            raise ValueError("regularization, cov_floor and stop_tolerance must be non-negative")
        if self.stop_patience < 1:
            raise ValueError("stop_patience must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def make_rng(seed: int) -> np.random.Generator:
    """The library's random stream: PCG64 seeded from a 64-bit integer."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class Population:
    """Sorted pool; ``values[i] == f(points[i])``, ascending."""

    points: NDArray
    values: NDArray
    evaluation_count: int = 0

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def best_point(self) -> NDArray:
        return self.points[0]

    @property
    def best_value(self) -> float:
        return float(self.values[0])


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    best_f: float
    best_x: NDArray
    pool_mean_f: float
    evaluations: int
    degenerate_skip: bool = False


@dataclass
class RunTrace:
    records: list[IterationRecord] = field(default_factory=list)
    status: str | None = None

    def __len__(self) -> int:
        return len(self.records)

    @property
    def best_f(self) -> NDArray:
        return np.array([r.best_f for r in self.records])

    @property
    def evaluations(self) -> NDArray:
        return np.array([r.evaluations for r in self.records], dtype=np.int64)

    @property
    def skips(self) -> int:
        return sum(r.degenerate_skip for r in self.records)


def _select(points: NDArray, values: NDArray, keep: int) -> tuple[NDArray, NDArray]:
    # Stable: on ties the earlier entry (the incumbent pool) wins.
    order = np.argsort(values, kind="stable")[:keep]
    return points[order], values[order]


def _check_dimension(objective: ObjectiveEvaluator, dimension: int | None = None) -> None:
    n = objective.domain.dimension
    declared = getattr(objective, "dimension", n)
    if declared != n:
        raise ValueError(f"objective dimension {declared} does not match its domain ({n})")
    if dimension is not None and dimension != n:
        raise ValueError(f"pool dimension {dimension} does not match objective dimension {n}")


def initialize(
    objective: ObjectiveEvaluator, config: AsocConfig, rng: np.random.Generator
) -> Population:
    """Draw 2N uniform points in the box and keep the best N."""
    _check_dimension(objective)
    n = objective.domain.dimension
    if config.pool_size < n + 2:
        warnings.warn(
            f"pool_size={config.pool_size} is below dimension + 2 = {n + 2}; "
            "the pair covariance will be rank deficient",
            RuntimeWarning,
            stacklevel=2,
        )
    candidates = objective.domain.sample(rng, 2 * config.pool_size)
    values = evaluate_points(objective, candidates)
    points, values = _select(candidates, values, config.pool_size)
    return Population(points, values, evaluation_count=2 * config.pool_size)


def _record(pop: Population, iteration: int, skipped: bool) -> IterationRecord:
    return IterationRecord(
        iteration=iteration,
        best_f=pop.best_value,
        best_x=pop.best_point.copy(),
        pool_mean_f=float(pop.values.mean()),
        evaluations=pop.evaluation_count,
        degenerate_skip=skipped,
    )


def step(
    pop: Population,
    objective: ObjectiveEvaluator,
    config: AsocConfig,
    rng: np.random.Generator,
    iteration: int = 0,
) -> tuple[Population, IterationRecord]:
    """One generation: fit, condition on the best point, sample, clip, merge.

    When the candidate distribution has collapsed and ``cov_floor`` is 0 no
    candidates are generated and the pool is returned unchanged.
    """
    model = linalg.fit_pair_moments(pop.points)
    dist = linalg.condition_on_best(model, pop.best_point, config.regularization)
    domain = objective.domain
    if config.cov_floor > 0:
        dist = linalg.inflate(dist, config.cov_floor * domain.width**2)
    elif dist.degenerate:
        return pop, _record(pop, iteration, skipped=True)

    candidates = domain.clip(linalg.sample_mvn(dist, pop.size, rng))
    values = evaluate_points(objective, candidates)
    points, values = _select(
        np.vstack([pop.points, candidates]), np.concatenate([pop.values, values]), pop.size
    )
    new = Population(points, values, pop.evaluation_count + pop.size)
    return new, _record(new, iteration, skipped=False)


def _iterate(
    pop: Population,
    objective: ObjectiveEvaluator,
    config: AsocConfig,
    rng: np.random.Generator,
    early_stop: bool,
) -> tuple[Population, RunTrace]:
    trace = RunTrace()
    skip_run = 0
    history = [pop.best_value]
    for it in range(1, config.max_iters + 1):
        pop, rec = step(pop, objective, config, rng, iteration=it)
        trace.records.append(rec)
        history.append(rec.best_f)
        skip_run = skip_run + 1 if rec.degenerate_skip else 0
        if not early_stop:
            continue
        if skip_run >= config.stop_patience:
            trace.status = Status.DEGENERATE_HALT
            break
        if it >= config.stop_patience:
            if history[it - config.stop_patience] - history[it] < config.stop_tolerance:
                trace.status = Status.CONVERGED
                break
    if trace.status is None:
        trace.status = Status.MAX_ITERS
    logger.debug("run finished: %s after %d iterations, best %.6g",
                 trace.status, len(trace), pop.best_value)
    return pop, trace


def run(
    objective: ObjectiveEvaluator,
    config: AsocConfig,
    rng: np.random.Generator | None = None,
    early_stop: bool = True,
) -> tuple[Population, RunTrace]:
    """Initialize a pool and iterate until converged, collapsed, or out of budget.

    Converged means the best value improved by less than ``stop_tolerance``
    over the last ``stop_patience`` iterations. ``early_stop=False`` always
    runs the full ``max_iters``.
    """
    if rng is None:
        rng = make_rng(config.seed)
    pop = initialize(objective, config, rng)
    return _iterate(pop, objective, config, rng, early_stop)


def continue_with(
    pop: Population,
    new_objective: ObjectiveEvaluator,
    config: AsocConfig,
    rng: np.random.Generator,
) -> tuple[Population, RunTrace]:
    """Carry a pool over to a changed objective without reinitializing.

    The points are clipped into the new box, re-evaluated, re-sorted, and the
    loop runs for the full ``config.max_iters``.
    """
    _check_dimension(new_objective, pop.dimension)
    points = new_objective.domain.clip(pop.points)
    values = evaluate_points(new_objective, points)
    points, values = _select(points, values, pop.size)
    carried = Population(points, values, pop.evaluation_count + pop.size)
    return _iterate(carried, new_objective, config, rng, early_stop=False)
