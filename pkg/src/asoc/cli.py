"""Command-line entry point.

    asoc list-functions
    asoc optimize --function booth --method asoc --seed 1
    asoc compare --functions booth,sphere:10 --methods asoc,ga --checkpoints 100,500 --seeds 5
    asoc adapt --iterations 2000 --output adapt.csv

Exit codes: 0 success, 1 runtime failure, 2 usage error. Data goes to stdout
only when no ``--output`` is given; diagnostics always go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from asoc import benchmarks, harness
from asoc.baselines import GaConfig, SaConfig, ga_run, sa_run
from asoc.core import AsocConfig, EvaluationError, run
from asoc.linalg import ConditioningError

log = logging.getLogger("asoc")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _csv_words(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (falls back to $ASOC_SEED, then 0)")
    common.add_argument("-o", "--output", type=Path, default=None, help="write results to this file")
    common.add_argument("--format", choices=("json", "csv", "table"), default=None,
                        help="output format (default: table on a terminal, json otherwise)")
    common.add_argument("--config", type=Path, default=None,
                        help="flat JSON object of flag values; explicit flags win")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="asoc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    subs = {}
    subs["list-functions"] = sub.add_parser(
        "list-functions", parents=[common], help="list the benchmark functions")

    p = subs["optimize"] = sub.add_parser("optimize", parents=[common], help="run one optimizer once")
    p.add_argument("--function", required=True, help="function name or 1-based index")
    p.add_argument("--dim", type=int, default=None, help="dimension for Sphere/Rosenbrock/Styblinski-Tang")
    p.add_argument("--method", choices=harness.METHODS, default="asoc")
    p.add_argument("--pool-size", type=int, default=30, help="ASOC pool / GA population size")
    p.add_argument("--max-iters", type=int, default=2000,
                   help="ASOC iterations, GA generations, or SA outer iterations")
    p.add_argument("--cov-floor", type=float, default=0.0)
    p.add_argument("--no-early-stop", action="store_true", help="ASOC: always run max-iters")

    p = subs["compare"] = sub.add_parser("compare", parents=[common], help="multi-seed comparison table")
    p.add_argument("--functions", type=_csv_words, default=None,
                   help="comma list of names/indices, optionally name:dim (default: all 18)")
    p.add_argument("--methods", type=_csv_words, default=list(harness.METHODS))
    p.add_argument("--checkpoints", type=_csv_ints, default=[100, 500, 2000])
    p.add_argument("--seeds", type=int, default=20, help="number of seeds derived from --seed")
    p.add_argument("--pool-size", type=int, default=30)
    p.add_argument("--cov-floor", type=float, default=0.0)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--trace-dir", type=Path, default=None, help="write one trace CSV per run here")

    p = subs["adapt"] = sub.add_parser("adapt", parents=[common], help="objective-switching run over functions 2..18")
    p.add_argument("--iterations", type=int, default=2000, help="iterations per function segment")
    p.add_argument("--pool-size", type=int, default=30)
    p.add_argument("--cov-floor", type=float, default=harness.ADAPTIVE_COV_FLOOR)
    return parser, subs


def _parse(argv):
    parser, subs = _build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            values = json.loads(args.config.read_text())
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config file {args.config}: {exc}")
        if not isinstance(values, dict):
            parser.error("config file must hold a flat JSON object")
        subparser = subs[args.command]
        known = set(vars(args)) - {"command"}
        defaults = {}
        for key, value in values.items():
            dest = key.replace("-", "_")
            if dest not in known or dest == "config":
                parser.error(f"unknown config key {key!r} for {args.command}")
            defaults[dest] = value
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
        # Config values bypass argparse type conversion.
        for name, conv in (("functions", _csv_words), ("methods", _csv_words), ("checkpoints", _csv_ints)):
            if isinstance(getattr(args, name, None), str):
                setattr(args, name, conv(getattr(args, name)))
        for name in ("output", "trace_dir"):
            if isinstance(getattr(args, name, None), str):
                setattr(args, name, Path(getattr(args, name)))
    if args.seed is None:
        env = os.environ.get("ASOC_SEED")
        try:
            args.seed = int(env) if env else 0
        except ValueError:
            parser.error(f"ASOC_SEED must be an integer, got {env!r}")
    if not 0 <= args.seed < 2**64:
        parser.error("--seed must be a 64-bit unsigned integer")
    if args.format is None:
        args.format = "table" if sys.stdout.isatty() else "json"
    return args


def _lookup(selector: str, dim: int | None):
    try:
        return benchmarks.get_function(selector, dim)
    except KeyError:
        raise UsageError(
            f"unknown function {selector!r}; valid names:\n  " + "\n  ".join(benchmarks.names())
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def _kv_table(pairs) -> str:
    width = max(len(k) for k, _ in pairs)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in pairs)


def cmd_list_functions(args) -> int:
    fns = benchmarks.catalog()
    if args.format == "json":
        data = [
            {
                "index": f.index,
                "name": f.key,
                "label": f.name,
                "dimension": f.dimension,
                "parametric": f.parametric,
                "lower": f.domain.lower.tolist(),
                "upper": f.domain.upper.tolist(),
                "minimum": f.minimum,
                "minimizers": [list(m) for m in f.minimizers],
            }
            for f in fns
        ]
        _emit(json.dumps(data, indent=2) + "\n", args.output)
        return EXIT_OK
    rows = [["#", "name", "n", "domain", "minimum"]]
    for f in fns:
        lo, hi = f.domain.lower, f.domain.upper
        dom = " x ".join(f"[{a:g},{b:g}]" for a, b in zip(lo[:2], hi[:2]))
        if f.dimension > 2:
            dom += f" x ... ({f.dimension}-D)"
        rows.append([str(f.index), f.key, str(f.dimension) + ("*" if f.parametric else ""), dom,
                     f"{f.minimum:.10g}"])
    _emit(harness.format_table(rows), args.output)
    return EXIT_OK


def cmd_optimize(args) -> int:
    fn = _lookup(args.function, args.dim)
    if args.method == "asoc":
        config = AsocConfig(pool_size=args.pool_size, max_iters=args.max_iters,
                            cov_floor=args.cov_floor, seed=args.seed)
        pop, trace = run(fn, config, early_stop=not args.no_early_stop)
        best_x, best_f = pop.best_point, pop.best_value
    elif args.method == "sa":
        best_x, best_f, trace = sa_run(fn, SaConfig(outer_iterations=args.max_iters, seed=args.seed))
    else:
        config = GaConfig(population_size=args.pool_size, generations=args.max_iters, seed=args.seed)
        best_x, best_f, trace = ga_run(fn, config)

    summary = {
        "function": fn.key,
        "dimension": fn.dimension,
        "method": args.method,
        "seed": args.seed,
        "best_x": [float(v) for v in best_x],
        "best_f": float(best_f),
        "iterations": len(trace),
        "evaluations": int(trace.records[-1].evaluations),
        "status": trace.status,
    }
    if args.output is not None:
        with open(args.output, "w", newline="") as fh:
            if args.format == "json":
                fh.write(json.dumps(summary, indent=2) + "\n")
            else:
                harness.write_trace_csv(harness.run_trace_rows(trace), fh)
        print(_kv_table([(k, v) for k, v in summary.items()]), end="", file=sys.stderr)
        return EXIT_OK
    if args.format == "json":
        sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    elif args.format == "csv":
        harness.write_trace_csv(harness.run_trace_rows(trace), sys.stdout)
    else:
        sys.stdout.write(_kv_table(list(summary.items())))
    return EXIT_OK


def _function_selectors(items: list[str] | None) -> list:
    if not items:
        return list(range(1, 19))
    out = []
    for item in items:
        name, _, dim = item.partition(":")
        try:
            d = int(dim) if dim else None
        except ValueError:
            raise UsageError(f"bad dimension in {item!r}")
        fn = _lookup(name, d)
        out.append((fn.key, d))
    return out


def cmd_compare(args) -> int:
    try:
        spec = harness.ExperimentSpec(
            functions=_function_selectors(args.functions),
            methods=args.methods,
            checkpoints=args.checkpoints,
            seeds=harness.derive_seeds(args.seed, args.seeds),
            asoc={"pool_size": args.pool_size, "cov_floor": args.cov_floor},
            ga={"population_size": args.pool_size},
        )
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc))
    report = harness.run_comparison(spec, jobs=max(1, args.jobs))
    log.info("comparison finished in %.1f s", report.wall_time)
    table = harness.format_table(harness.summarize(report))

    if args.trace_dir is not None:
        args.trace_dir.mkdir(parents=True, exist_ok=True)
        for r in report.runs:
            if r.error is None:
                name = f"{r.key}_{r.method}_{r.seed}.csv"
                with open(args.trace_dir / name, "w", newline="") as fh:
                    harness.write_trace_csv(harness.run_trace_rows(r), fh)

    if args.output is not None:
        args.output.write_text(report.to_json())
        args.output.with_suffix(".txt").write_text(table)
        sys.stderr.write(table)
    elif args.format == "table":
        sys.stdout.write(table)
    else:
        sys.stdout.write(report.to_json())

    failed = [r for r in report.runs if r.error is not None]
    if failed and len(failed) == len(report.runs):
        log.error("every run failed; first error: %s", failed[0].error)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_adapt(args) -> int:
    result = harness.run_adaptivity(
        master_seed=args.seed,
        iterations_per_segment=args.iterations,
        cov_floor=args.cov_floor,
        pool_size=args.pool_size,
    )
    segments = [
        {
            "segment_index": s.index,
            "function": s.function.key,
            "true_minimum": s.function.minimum,
            "final_best_f": s.final_best,
            "final_best_x": s.trace.records[-1].best_x.tolist(),
        }
        for s in result.segments
    ]
    if args.output is not None or args.format == "csv":
        if args.output is None:
            harness.write_trace_csv(result.trace_rows(), sys.stdout)
        else:
            with open(args.output, "w", newline="") as fh:
                if args.format == "json":
                    fh.write(json.dumps(segments, indent=2) + "\n")
                else:
                    harness.write_trace_csv(result.trace_rows(), fh)
        return EXIT_OK
    if args.format == "json":
        sys.stdout.write(json.dumps(segments, indent=2) + "\n")
    else:
        rows = [["segment", "function", "true minimum", "final best"]]
        rows += [[str(s["segment_index"]), s["function"], f"{s['true_minimum']:.6g}",
                  f"{s['final_best_f']:.6g}"] for s in segments]
        sys.stdout.write(harness.format_table(rows))
    return EXIT_OK


COMMANDS = {
    "list-functions": cmd_list_functions,
    "optimize": cmd_optimize,
    "compare": cmd_compare,
    "adapt": cmd_adapt,
}


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"asoc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EvaluationError, ConditioningError, OSError, ValueError) as exc:
        print(f"asoc {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
