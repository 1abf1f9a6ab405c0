"""Experiment orchestration: multi-seed method comparisons and the adaptivity run.

A comparison runs every (function, method, seed) cell once to the largest
checkpoint and reads best-so-far values at each checkpoint. Simulated
annealing is the exception: its cooling schedule depends on the total
budget, so it is run once per checkpoint with the schedule spanning exactly
that many outer iterations.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from asoc import benchmarks
from asoc.baselines import GaConfig, SaConfig, ga_run, sa_run
from asoc.core import AsocConfig, Population, RunTrace, continue_with, make_rng, run

__all__ = [
    "ADAPTIVE_COV_FLOOR",
    "METHODS",
    "NOT_CONVERGED_ABOVE",
    "TRACE_COLUMNS",
    "AdaptivityResult",
    "CellStats",
    "ExperimentReport",
    "ExperimentSpec",
    "RunResult",
    "Segment",
    "derive_seeds",
    "format_table",
    "run_adaptivity",
    "run_comparison",
    "run_trace_rows",
    "summarize",
    "write_trace_csv",
]

logger = logging.getLogger(__name__)

METHODS = ("asoc", "sa", "ga")
NOT_CONVERGED_ABOVE = 1e3
TRACE_COLUMNS = ("iteration", "best_f", "pool_mean_f", "evaluations", "segment_index")
ADAPTIVE_COV_FLOOR = 1e-2
_METHOD_LABELS = {"asoc": "ASOC", "sa": "SA", "ga": "GA"}


def derive_seeds(master_seed: int, count: int = 20) -> tuple[int, ...]:
    """Deterministic 64-bit run seeds from one master seed."""
    state = np.random.SeedSequence(master_seed).generate_state(count, dtype=np.uint64)
    return tuple(int(s) for s in state)


def _as_selector(item) -> tuple[str | int, int | None]:
    if isinstance(item, (tuple, list)):
        sel, dim = item
        return sel, dim
    return item, None


@dataclass
class ExperimentSpec:
    """What to run.

    ``functions`` holds names, 1-based indices, or ``(selector, dimension)``
    pairs. ``asoc``, ``sa`` and ``ga`` are keyword overrides for the
    respective config classes (iteration budgets and seeds are set by the
    harness).
    """

    functions: Sequence = tuple(range(1, 19))
    methods: Sequence[str] = METHODS
    checkpoints: Sequence[int] = (100, 500, 2000)
    seeds: Sequence[int] = field(default_factory=lambda: derive_seeds(0))
    asoc: dict = field(default_factory=dict)
    sa: dict = field(default_factory=dict)
    ga: dict = field(default_factory=dict)

    def __post_init__(self):
        self.functions = tuple(_as_selector(f) for f in self.functions)
        self.methods = tuple(m.lower() for m in self.methods)
        self.checkpoints = tuple(int(c) for c in self.checkpoints)
        self.seeds = tuple(int(s) for s in self.seeds)
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown methods {sorted(bad)}; choose from {METHODS}")
        if not self.checkpoints or self.checkpoints[0] < 1 or any(
            b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])
        ):
            raise ValueError("checkpoints must be positive and strictly increasing")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        for sel, dim in self.functions:
            benchmarks.get_function(sel, dim)


@dataclass
class RunResult:
    """One (function, method, seed) cell."""

    function: str
    key: str
    method: str
    seed: int
    checkpoint_values: dict[int, float] = field(default_factory=dict)
    checkpoint_evaluations: dict[int, int] = field(default_factory=dict)
    best_f: NDArray | None = None
    pool_mean_f: NDArray | None = None
    evaluations: NDArray | None = None
    status: str | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "method": self.method,
            "seed": self.seed,
            "status": self.status,
            "error": self.error,
            "checkpoints": {str(k): v for k, v in self.checkpoint_values.items()},
            "evaluations": {str(k): v for k, v in self.checkpoint_evaluations.items()},
        }


@dataclass
class CellStats:
    median: float
    min: float
    max: float
    iqr: float
    runs: int
    errors: int = 0

    @classmethod
    def from_values(cls, values: Sequence[float], errors: int = 0) -> "CellStats":
        if not values:
            nan = math.nan
            return cls(nan, nan, nan, nan, 0, errors)
        v = np.asarray(values, dtype=float)
        q1, q3 = np.percentile(v, [25, 75])
        return cls(float(np.median(v)), float(v.min()), float(v.max()), float(q3 - q1), len(v), errors)

    @property
    def failed(self) -> bool:
        return self.errors > 0


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    functions: list[tuple[str, float]]
    runs: list[RunResult]
    stats: dict[tuple[str, str, int], CellStats]
    wall_time: float = 0.0

    def cell(self, function: str, method: str, checkpoint: int) -> CellStats:
        return self.stats[(function, method, checkpoint)]

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "spec": {
                "functions": [[s, d] for s, d in self.spec.functions],
                "methods": list(self.spec.methods),
                "checkpoints": list(self.spec.checkpoints),
                "seeds": list(self.spec.seeds),
                "overrides": {"asoc": self.spec.asoc, "sa": self.spec.sa, "ga": self.spec.ga},
            },
            "functions": [{"name": n, "true_minimum": m} for n, m in self.functions],
            "cells": [
                {"function": f, "method": m, "checkpoint": c, **asdict(s)}
                for (f, m, c), s in self.stats.items()
            ],
            "runs": [r.to_dict() for r in self.runs],
        }
        if include_timing:
            out["wall_time_s"] = self.wall_time
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(_jsonable(self.to_dict(include_timing)), indent=2, allow_nan=False) + "\n"


def _jsonable(obj):
    # NaN/inf are not valid JSON; failed cells carry null instead.
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _trace_arrays(result: RunResult, trace: RunTrace) -> None:
    result.best_f = trace.best_f
    result.pool_mean_f = np.array([r.pool_mean_f for r in trace.records])
    result.evaluations = trace.evaluations
    result.status = trace.status


def _run_cell(args) -> RunResult:
    (selector, dim), method, seed, checkpoints, overrides = args
    fn = benchmarks.get_function(selector, dim)
    result = RunResult(function=fn.label, key=fn.key, method=method, seed=seed)
    last = checkpoints[-1]
    try:
        if method == "asoc":
            config = AsocConfig(**{**overrides, "max_iters": last, "seed": seed})
            _, trace = run(fn, config, early_stop=False)
        elif method == "ga":
            config = GaConfig(**{**overrides, "generations": last, "seed": seed})
            _, _, trace = ga_run(fn, config)
        else:
            trace = None
            for cp in checkpoints:
                config = SaConfig(**{**overrides, "outer_iterations": cp, "seed": seed})
                _, value, trace = sa_run(fn, config)
                result.checkpoint_values[cp] = value
                result.checkpoint_evaluations[cp] = int(trace.evaluations[-1])
        if method != "sa":
            for cp in checkpoints:
                rec = trace.records[cp - 1]
                result.checkpoint_values[cp] = rec.best_f
                result.checkpoint_evaluations[cp] = rec.evaluations
        _trace_arrays(result, trace)
    except Exception as exc:  # a failed cell must not abort the experiment
        logger.warning("%s/%s/seed=%d failed: %s", fn.label, method, seed, exc)
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def run_comparison(spec: ExperimentSpec, jobs: int = 1) -> ExperimentReport:
    """Run every cell of ``spec`` and aggregate per-checkpoint statistics.

    ``jobs > 1`` spreads cells over worker processes; results are assembled
    in spec order, so the report does not depend on ``jobs``.
    """
    start = time.perf_counter()
    overrides = {"asoc": spec.asoc, "sa": spec.sa, "ga": spec.ga}
    tasks = [
        (fsel, method, seed, spec.checkpoints, overrides[method])
        for fsel in spec.functions
        for method in spec.methods
        for seed in spec.seeds
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_cell, tasks, chunksize=1))
    else:
        runs = [_run_cell(t) for t in tasks]

    functions = []
    for sel, dim in spec.functions:
        fn = benchmarks.get_function(sel, dim)
        functions.append((fn.label, fn.minimum))

    stats = {}
    for label, _ in functions:
        for method in spec.methods:
            cell_runs = [r for r in runs if r.function == label and r.method == method]
            errors = sum(r.error is not None for r in cell_runs)
            for cp in spec.checkpoints:
                values = [r.checkpoint_values[cp] for r in cell_runs if r.error is None]
                stats[(label, method, cp)] = CellStats.from_values(values, errors)
    return ExperimentReport(spec, functions, runs, stats, time.perf_counter() - start)


def _format_value(stats: CellStats) -> str:
    if stats.failed:
        return "ERR"
    if stats.median > NOT_CONVERGED_ABOVE:
        return "-"
    return f"{stats.median:.6g}"


def summarize(report: ExperimentReport) -> list[list[str]]:
    """Rows shaped like the classic comparison table, header first.

    Each data cell is the median best value over seeds; medians above
    ``NOT_CONVERGED_ABOVE`` print as ``-`` and failed cells as ``ERR``.
    """
    methods = report.spec.methods
    checkpoints = report.spec.checkpoints
    header = ["Function", "True minimum"] + [
        f"{_METHOD_LABELS[m]} {cp}" for m in methods for cp in checkpoints
    ]
    rows = [header]
    if not methods:
        return rows
    for label, minimum in report.functions:
        row = [label, f"{minimum:.6g}"]
        for m in methods:
            for cp in checkpoints:
                row.append(_format_value(report.stats[(label, m, cp)]))
        rows.append(row)
    return rows


def format_table(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for k, row in enumerate(rows):
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


@dataclass
class Segment:
    index: int
    function: benchmarks.BenchmarkFunction
    trace: RunTrace
    start_iteration: int

    @property
    def final_best(self) -> float:
        return self.trace.records[-1].best_f


@dataclass
class AdaptivityResult:
    segments: list[Segment]
    population: Population

    def trace_rows(self) -> Iterable[tuple]:
        for seg in self.segments:
            for rec in seg.trace.records:
                yield (seg.start_iteration + rec.iteration, rec.best_f, rec.pool_mean_f,
                       rec.evaluations, seg.index)


def run_adaptivity(
    master_seed: int = 0,
    iterations_per_segment: int = 2000,
    cov_floor: float = ADAPTIVE_COV_FLOOR,
    pool_size: int = 30,
    functions: Sequence[int] = tuple(range(2, 19)),
) -> AdaptivityResult:
    """Switch the objective through ``functions`` without reinitializing the pool.

    Every function is used at n = 2 (the pool dimension cannot change). Each
    segment runs the full ``iterations_per_segment`` with early stopping off.
    The default ``cov_floor`` keeps the candidate distribution from
    collapsing completely, which a pool needs in order to move after a
    switch; pass 0 for the pure algorithm.
    """
    rng = make_rng(master_seed)
    config = AsocConfig(
        pool_size=pool_size, max_iters=iterations_per_segment, cov_floor=cov_floor, seed=master_seed
    )
    fns = [benchmarks.get_function(i, 2 if i in (2, 3, 18) else None) for i in functions]
    segments = []
    pop = None
    offset = 0
    for k, fn in enumerate(fns):
        if pop is None:
            pop, trace = run(fn, config, rng=rng, early_stop=False)
        else:
            pop, trace = continue_with(pop, fn, config, rng)
        segments.append(Segment(index=k, function=fn, trace=trace, start_iteration=offset))
        logger.info("segment %d (%s): best %.6g", k, fn.name, trace.records[-1].best_f)
        offset += len(trace)
    return AdaptivityResult(segments, pop)


def write_trace_csv(rows: Iterable[Sequence], out: IO[str] | None = None) -> str | None:
    """Write trace rows with the standard header; return the text if ``out`` is None."""
    buf = io.StringIO() if out is None else out
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for row in rows:
        writer.writerow([_csv_num(v) for v in row])
    return buf.getvalue() if out is None else None


def _csv_num(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def run_trace_rows(result: RunResult | RunTrace, segment_index: int = 0) -> Iterable[tuple]:
    """CSV rows for a single run."""
    if isinstance(result, RunTrace):
        for rec in result.records:
            yield rec.iteration, rec.best_f, rec.pool_mean_f, rec.evaluations, segment_index
        return
    for i, (b, m, e) in enumerate(zip(result.best_f, result.pool_mean_f, result.evaluations), 1):
        yield i, float(b), float(m), int(e), segment_index
