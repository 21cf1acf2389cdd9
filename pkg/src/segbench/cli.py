"""Command-line interface for the benchmark suite."""
from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from pathlib import Path

from . import algorithms, encoding, lut, problems, runner, surrogate


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed")
    parser.add_argument("--out", type=Path, default=Path("segbench-out"),
                        help="output directory")
    parser.add_argument("--data-dir", type=Path, default=None,
                        help="evaluator data directory (default: $SEGBENCH_DATA_DIR "
                             "or ./segbench-data)")
    parser.add_argument("--no-perturb", action="store_true",
                        help="disable hardware-metric perturbation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segbench",
        description="Multi-objective HW-NAS benchmark suite: 15 problems, "
                    "LUT + surrogate evaluators, six MOEAs, HV statistics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a benchmark experiment")
    _add_common(p_run)
    p_run.add_argument("--problem", type=int, action="append", dest="problems",
                       help="problem id (repeatable; default: all 15)")
    p_run.add_argument("--algo", action="append", dest="algos",
                       choices=algorithms.ALGORITHMS,
                       help="algorithm (repeatable; default: all six)")
    p_run.add_argument("--runs", type=int, default=31)
    p_run.add_argument("--evals", type=int, default=10_000)
    p_run.add_argument("--jobs", type=int, default=1,
                       help="independent runs executed in parallel")

    p_sample = sub.add_parser("sample", help="random-architecture metric CSV + figures")
    _add_common(p_sample)
    p_sample.add_argument("-n", type=int, default=10_000, help="number of samples")
    p_sample.add_argument("--metric", action="append", dest="metrics",
                          choices=lut.METRICS, help="metric column (repeatable; default all)")
    p_sample.add_argument("--no-figures", action="store_true",
                          help="skip matplotlib rendering")

    p_train = sub.add_parser("train-surrogate", help="fit the error surrogate")
    _add_common(p_train)
    p_train.add_argument("--pairs", type=int, default=runner.DEFAULT_TRAIN_PAIRS)
    p_train.add_argument("--epochs", type=int, default=surrogate.TrainingConfig.epochs)

    p_bench = sub.add_parser("bench-eval", help="time batch evaluation throughput")
    _add_common(p_bench)
    p_bench.add_argument("--problem", type=int, default=1)
    p_bench.add_argument("--batch", type=int, default=100)
    p_bench.add_argument("--repeats", type=int, default=31)

    p_serve = sub.add_parser("serve", help="JSONL evaluation protocol endpoint")
    _add_common(p_serve)
    group = p_serve.add_mutually_exclusive_group()
    group.add_argument("--stdio", action="store_true", help="serve on stdin/stdout")
    group.add_argument("--port", type=int, default=None, help="TCP port (0 = ephemeral)")

    p_report = sub.add_parser("report", help="rebuild summary, CSV, and figures "
                                             "from recorded runs")
    _add_common(p_report)
    p_report.add_argument("--problem", type=int, action="append", dest="problems")
    p_report.add_argument("--algo", action="append", dest="algos",
                          choices=algorithms.ALGORITHMS)
    p_report.add_argument("--runs", type=int, default=31)
    p_report.add_argument("--evals", type=int, default=10_000)
    return parser


def _experiment_config(args) -> runner.ExperimentConfig:
    return runner.ExperimentConfig(
        problems=args.problems or list(problems.PROBLEM_IDS),
        algorithms=args.algos or list(algorithms.ALGORITHMS),
        runs=args.runs,
        evaluations=args.evals,
        seed_base=args.seed,
        perturb=not args.no_perturb,
        jobs=getattr(args, "jobs", 1),
        output_dir=args.out,
        data_dir=args.data_dir,
    )


def cmd_run(args) -> int:
    cfg = _experiment_config(args)
    summary = runner.run_experiment(cfg, log=lambda m: print(m, file=sys.stderr))
    from .reporting import format_summary_text
    print(format_summary_text(summary), end="")
    return 0


def cmd_sample(args) -> int:
    from .reporting import render_sample_figures, write_sample_csv

    ev = runner.ensure_evaluators(args.data_dir, perturb=not args.no_perturb)
    metrics = tuple(args.metrics) if args.metrics else lut.METRICS
    genotypes = encoding.sample_random(args.n, args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / "samples.csv"
    columns = write_sample_csv(csv_path, genotypes, ev.table, metrics)
    print(f"wrote {csv_path} ({args.n} rows)")
    if not args.no_figures:
        for p in render_sample_figures(args.out, columns):
            print(f"wrote {p}")
    return 0


def cmd_train_surrogate(args) -> int:
    d = runner.data_dir(args.data_dir)
    d.mkdir(parents=True, exist_ok=True)
    table_path = d / "cost_table.json"
    if table_path.exists():
        table = lut.CostTable.load(table_path)
    else:
        table = lut.generate_synthetic_table(runner.DEFAULT_TABLE_SEED)
        table.save(table_path)
    cfg = surrogate.TrainingConfig(epochs=args.epochs)
    model, report = runner.train_surrogate(table, n_pairs=args.pairs,
                                           seed=args.seed, cfg=cfg)
    model.save(d / "surrogate.json")
    report_out = {k: v for k, v in report.items() if k != "epoch_losses"}
    with open(d / "surrogate_report.json", "w") as fh:
        json.dump(report, fh, indent=1)
    print(json.dumps(report_out, indent=1))
    return 0


def bench_eval(problem_id: int, batch: int, repeats: int,
               ev: problems.Evaluators, seed: int = 0):
    """Mean/std seconds for evaluating `batch` random architectures."""
    if batch < 1:
        raise ValueError("batch must be >= 1")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    p = problems.get_problem(problem_id)
    genotypes = encoding.sample_random(batch, seed)
    times = []
    for r in range(repeats):
        t0 = time.perf_counter()
        problems.evaluate_batch(p, genotypes, ev, seed=seed, counter_start=r * batch)
        times.append(time.perf_counter() - t0)
    mean = statistics.fmean(times)
    std = statistics.pstdev(times) if repeats > 1 else 0.0
    return mean, std


def cmd_bench_eval(args) -> int:
    ev = runner.ensure_evaluators(args.data_dir, perturb=not args.no_perturb)
    mean, std = bench_eval(args.problem, args.batch, args.repeats, ev, args.seed)
    print(f"problem {args.problem}: {mean:.4f} +/- {std:.4f} s "
          f"for {args.batch} architectures ({args.repeats} repeats)")
    return 0


def cmd_serve(args) -> int:
    from .server import ProtocolServer

    ev = runner.ensure_evaluators(args.data_dir, perturb=not args.no_perturb)
    server = ProtocolServer(ev)
    if args.port is not None:
        def announce(port):
            print(f"listening on 127.0.0.1:{port}", flush=True)
        server.serve_tcp(port=args.port, ready=announce)
    else:
        server.serve_stdio()
    return 0


def cmd_report(args) -> int:
    from .reporting import (build_summary, format_summary_text,
                            render_report_figures, write_hv_csv, write_summary)

    cfg = _experiment_config(args)
    summary = build_summary(cfg)
    write_summary(cfg.output_dir, summary)
    write_hv_csv(cfg, cfg.output_dir / "hv_samples.csv")
    figures = render_report_figures(cfg, cfg.output_dir / "figures")
    print(format_summary_text(summary), end="")
    for p in figures:
        print(f"wrote {p}", file=sys.stderr)
    return 0


_COMMANDS = {
    "run": cmd_run,
    "sample": cmd_sample,
    "train-surrogate": cmd_train_surrogate,
    "bench-eval": cmd_bench_eval,
    "serve": cmd_serve,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
