"""Acceptance checks, one test per criterion.

Each test prints a single ``[PASS]`` / ``[FAIL]`` line with the measured
numbers (shown even under output capture), then asserts. Stochastic
criteria use 20 run seeds derived from master seed 0, fixed in advance.
"""

import io
import itertools
import time

import numpy as np
import pytest
from oracles import naive_pair_moments, random_sorted_pool

from asoc import linalg
from asoc.baselines import GaConfig, SaConfig, ga_run, metropolis_accept, sa_run
from asoc.benchmarks import catalog, get_function
from asoc.cli import main
from asoc.core import AsocConfig, Population, Status, make_rng, run, step
from asoc.harness import (
    ExperimentSpec,
    derive_seeds,
    run_adaptivity,
    run_comparison,
    write_trace_csv,
)

SEEDS = derive_seeds(0)

# (selector, dimension, checkpoint, threshold)
CONVERGENCE = [
    ("sphere", 10, 500, 0.05),
    ("beale", None, 500, 0.01),
    ("booth", None, 500, 0.01),
    ("matyas", None, 500, 0.001),
    ("eggholder", None, 2000, -930.0),
    ("styblinski_tang", 2, 2000, -78.0),
    ("goldstein_price", None, 500, 3.05),
    ("cross_in_tray", None, 2000, -2.06),
]

# final-best bands for the adaptivity run, keyed by function
ADAPTIVE_BANDS = {
    "sphere": 0.05,
    "beale": 0.01,
    "booth": 0.01,
    "matyas": 0.001,
    "goldstein_price": 3.05,
    "cross_in_tray": -2.06,
    "eggholder": -930.0,
    "styblinski_tang": -78.0,
}


@pytest.fixture
def report_line(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")

    return emit


@pytest.fixture(scope="module")
def asoc_runs():
    """ASOC comparison over the convergence and failure-mode functions."""
    fns = [(name, dim) for name, dim, _, _ in CONVERGENCE]
    fns += [("easom", None), ("schaffer_n4", None)]
    spec = ExperimentSpec(functions=fns, methods=["asoc"], checkpoints=[500, 2000], seeds=SEEDS)
    start = time.perf_counter()
    report = run_comparison(spec)
    return report, time.perf_counter() - start


def test_criterion_1_pair_moment_oracle(report_line):
    rng = np.random.default_rng(1)
    shapes = list(itertools.product((2, 3, 10, 30), (1, 2, 5)))
    start = time.perf_counter()
    worst = 0.0
    for k in range(100):
        n_points, dim = shapes[k % len(shapes)]
        pool = random_sorted_pool(rng, n_points, dim, scale=3.0)
        fast = linalg.fit_pair_moments(pool)
        slow = naive_pair_moments(pool)
        for a, b in zip((fast.mu1, fast.mu2, fast.sigma11, fast.sigma12, fast.sigma22), slow):
            worst = max(worst, float(np.max(np.abs(a - b))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 10
    report_line(1, ok, f"max |closed - naive| = {worst:.2e} (<= 1e-10), {elapsed:.2f} s (< 10 s)")
    assert ok


def _model(mu1, mu2, s11, s12, s22):
    a = lambda v: np.atleast_2d(np.asarray(v, float))  # noqa: E731
    return linalg.PairGaussianModel(
        np.atleast_1d(np.asarray(mu1, float)), np.atleast_1d(np.asarray(mu2, float)),
        a(s11), a(s12), a(s22), pair_count=0,
    )


def test_criterion_2_conditional_gaussian(report_line):
    one = linalg.condition_on_best(_model(0, 0, 1, 0.5, 1), np.array([2.0]), regularization=0.0)
    err_1d = max(abs(one.mu_hat[0] - 1.0), abs(one.sigma_hat[0, 0] - 0.75))

    two = linalg.condition_on_best(
        _model([1, 2], [0, 0], np.eye(2), np.diag([0.5, 0.25]), 0.5 * np.eye(2)),
        np.array([1.0, 2.0]),
        regularization=0.0,
    )
    # mu_hat = mu1 + S12 S22^-1 x1 = (1 + .5*1/.5, 2 + .25*2/.5) = (2, 3)
    # sigma_hat = I - S12 S22^-1 S12' = diag(1 - .25/.5, 1 - .0625/.5) = diag(.5, .875)
    err_2d = max(
        float(np.max(np.abs(two.mu_hat - [2.0, 3.0]))),
        float(np.max(np.abs(two.sigma_hat - np.diag([0.5, 0.875])))),
    )

    rng = np.random.default_rng(2)
    min_eig = np.inf
    for k in range(1000):
        n = 1 + k % 4
        g = rng.standard_normal((2 * n, 2 * n - int(rng.integers(0, 2))))
        cov = g @ g.T  # PSD, rank deficient half the time
        mu = rng.standard_normal(2 * n)
        model = _model(mu[:n], mu[n:], cov[:n, :n], cov[:n, n:], cov[n:, n:])
        dist = linalg.condition_on_best(model, rng.standard_normal(n) * 2)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(dist.sigma_hat).min()))
    ok = err_1d <= 1e-12 and err_2d <= 1e-12 and min_eig >= 0.0
    report_line(2, ok, f"1-D err {err_1d:.1e}, 2-D err {err_2d:.1e} (<= 1e-12); "
                       f"min eigenvalue over 1000 inputs {min_eig:.2e} (>= 0)")
    assert ok


def test_criterion_3_benchmark_fidelity(report_line):
    bad = []
    for fn in catalog():
        for m in fn.minimizers:
            err = abs(fn(np.array(m)) - fn.minimum)
            if err > fn.tolerance:
                bad.append(f"{fn.key} {m}: {err:.2e}")
    easom = abs(get_function("easom")(np.array([np.pi, np.pi])) + 1.0)
    ok = not bad and easom <= 1e-12
    report_line(3, ok, f"{18 - len({b.split()[0] for b in bad})}/18 functions hit their minima; "
                       f"|Easom(pi,pi) + 1| = {easom:.1e}" + (f"; misses: {bad}" if bad else ""))
    assert ok


def test_criterion_4_asoc_convergence(report_line, asoc_runs):
    report, elapsed = asoc_runs
    parts, ok = [], elapsed < 600
    for name, dim, cp, threshold in CONVERGENCE:
        fn = get_function(name, dim)
        median = report.cell(fn.label, "asoc", cp).median
        passed = median <= threshold
        ok &= passed
        parts.append(f"{fn.label}@{cp} median {median:.4g} <= {threshold:g} "
                     f"{'ok' if passed else 'MISSED'}")
    report_line(4, ok, "; ".join(parts) + f"; runtime {elapsed:.0f} s (< 600 s)")
    assert ok


def test_criterion_5_known_failure_modes(report_line, asoc_runs):
    report, _ = asoc_runs
    easom = report.cell("Easom", "asoc", 2000).median
    schaffer = report.cell("Schaffer N.4", "asoc", 2000).median
    ok = easom > -0.9 and 0.29 <= schaffer <= 0.51
    report_line(5, ok, f"Easom median {easom:.4g} (> -0.9); "
                       f"Schaffer N.4 median {schaffer:.6g} (in [0.29, 0.51])")
    assert ok


def test_criterion_6_elitism(report_line, asoc_runs):
    report, _ = asoc_runs
    violations = 0
    iterations = 0
    for r in report.runs:
        assert r.error is None, r.error
        violations += int(np.sum(np.diff(r.best_f) > 0))
        iterations += len(r.best_f)
    ok = violations == 0
    report_line(6, ok, f"{violations} best_f increases over {len(report.runs)} runs "
                       f"/ {iterations} iterations")
    assert ok


def test_criterion_7_adaptivity(report_line):
    result = run_adaptivity(master_seed=0)
    within, parts = 0, []
    segment_violations = 0
    for seg in result.segments:
        segment_violations += int(np.sum(np.diff(seg.trace.best_f) > 0))
        band = ADAPTIVE_BANDS.get(seg.function.key)
        final = seg.final_best
        if band is None or final <= band:
            within += 1
        if band is not None:
            parts.append(f"{seg.function.key} {final:.4g}{'' if final <= band else ' MISSED'}")
    ok = len(result.segments) == 17 and within >= 15 and segment_violations == 0
    report_line(7, ok, f"{within}/17 segments within band (>= 15), "
                       f"{segment_violations} in-segment regressions; " + ", ".join(parts))
    assert ok


def test_criterion_8_baselines(report_line):
    ga = [ga_run(get_function("sphere", 10), GaConfig(generations=500, seed=s))[1] for s in SEEDS]
    sa = [sa_run(get_function("booth"), SaConfig(seed=s))[1] for s in SEEDS]
    rng = np.random.default_rng(8)
    delta, temperature = 1.0, 2.0
    freq = np.mean([metropolis_accept(delta, temperature, rng) for _ in range(10000)])
    gap = abs(freq - np.exp(-delta / temperature))
    ok = np.median(ga) <= 0.05 and np.median(sa) <= 0.05 and gap <= 0.02
    report_line(8, ok, f"GA Sphere(n=10)@500 median {np.median(ga):.3g} (<= 0.05); "
                       f"SA Booth@2000 median {np.median(sa):.3g} (<= 0.05); "
                       f"Metropolis |freq - exp(-d/T)| = {gap:.4f} (<= 0.02)")
    assert ok


def _cli_bytes(capsys, argv):
    code = main(argv)
    out, _ = capsys.readouterr()
    assert code == 0
    return out.encode()


def test_criterion_9_determinism(report_line, capsys, tmp_path):
    checks = {}
    for method in ("asoc", "sa", "ga"):
        argv = ["optimize", "--function", "holder_table", "--method", method, "--seed", "11",
                "--max-iters", "200", "--format", "csv"]
        checks[f"{method} trace"] = _cli_bytes(capsys, argv) == _cli_bytes(capsys, argv)
    argv = ["compare", "--functions", "booth,eggholder", "--checkpoints", "10,50", "--seeds", "3",
            "--seed", "7", "--format", "json"]
    checks["compare report"] = _cli_bytes(capsys, argv) == _cli_bytes(capsys, argv)
    argv = ["adapt", "--iterations", "50", "--seed", "3", "--format", "csv"]
    checks["adapt trace"] = _cli_bytes(capsys, argv) == _cli_bytes(capsys, argv)
    buf_a, buf_b = io.StringIO(), io.StringIO()
    write_trace_csv(run_adaptivity(5, 20).trace_rows(), buf_a)
    write_trace_csv(run_adaptivity(5, 20).trace_rows(), buf_b)
    checks["adaptivity api"] = buf_a.getvalue() == buf_b.getvalue()
    ok = all(checks.values())
    report_line(9, ok, ", ".join(f"{k} {'identical' if v else 'DIFFERS'}" for k, v in checks.items()))
    assert ok


class _Counter:
    def __init__(self, fn):
        self.fn, self.domain, self.calls = fn, fn.domain, 0

    def __call__(self, x):
        self.calls += 1
        return self.fn(x)


def test_criterion_10_degenerate_handling(report_line):
    fn = _Counter(get_function("booth"))
    pts = np.tile([2.0, -1.0], (30, 1))
    pop = Population(pts, np.full(30, get_function("booth")(pts[0])), 60)
    config = AsocConfig(stop_patience=200, max_iters=2000)
    new, rec = step(pop, fn, config, make_rng(0))
    skip_ok = rec.degenerate_skip and fn.calls == 0 and new.evaluation_count == 60

    from asoc.core import _iterate

    _, trace = _iterate(pop, fn, config, make_rng(0), early_stop=True)
    halt_ok = trace.status == Status.DEGENERATE_HALT and len(trace) == 200 and fn.calls == 0
    ok = skip_ok and halt_ok
    report_line(10, ok, f"skip with {fn.calls} evaluations: {skip_ok}; "
                        f"status {trace.status} after {len(trace)} skips: {halt_ok}")
    assert ok


def test_collapsed_run_halts_through_public_api():
    # a 1-D flat objective collapses the pool quickly and must stop early
    _, trace = run(get_function("sphere", 1), AsocConfig(max_iters=2000))
    assert trace.status in (Status.CONVERGED, Status.DEGENERATE_HALT)
