"""ASOC: adaptive, parameter-free stochastic optimization for continuous variables."""

from asoc.core import (
    AsocConfig,
    BoxDomain,
    EvaluationError,
    Objective,
    Population,
    RunTrace,
    Status,
    continue_with,
    initialize,
    run,
    step,
)

__all__ = [
    "AsocConfig",
    "BoxDomain",
    "EvaluationError",
    "Objective",
    "Population",
    "RunTrace",
    "Status",
    "continue_with",
    "initialize",
    "run",
    "step",
]

__version__ = "0.1.0"
