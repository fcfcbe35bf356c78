"""Command line interface: ``bench run``, ``bench summarize``, ``bench verify``.

The SFFT2D_THREADS environment variable, when set, caps the numeric
libraries' thread pools before they initialize.
"""

from __future__ import annotations

import argparse
import os
import sys


def _apply_thread_env():
    threads = os.environ.get("SFFT2D_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def _parse_int_list(text: str):
    return tuple(int(v) for v in text.split(",") if v)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Benchmark the dense, sparse, and sparsity-detecting 2D FFTs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment grid and write CSV results")
    run.add_argument("--algos", default="dense,sfft,atsfft",
                     help="comma list from dense,sfft,atsfft")
    run.add_argument("--sizes", default="256,512,1024", type=_parse_int_list,
                     help="comma list of matrix sides (powers of 2)")
    run.add_argument("--sparsities", default="8", type=_parse_int_list,
                     help="comma list of planted sparsities")
    run.add_argument("--trials", default=20, type=int)
    run.add_argument("--seed", default=0, type=int, help="master seed")
    run.add_argument("--loops", default=8, type=int, help="location/estimation loops")
    run.add_argument("--est-loops", default=8, type=int, dest="est_loops",
                     help="estimation loops after sparsity detection")
    run.add_argument("--include-setup", action="store_true",
                     help="time window construction inside each trial")
    run.add_argument("--out", default="results.csv", help="output CSV path")
    run.add_argument("--quiet", action="store_true")

    summ = sub.add_parser("summarize", help="aggregate a results CSV")
    summ.add_argument("results", help="CSV produced by `bench run`")
    summ.add_argument("--format", choices=("table", "csv"), default="table")
    summ.add_argument("--figures", metavar="DIR", default=None,
                      help="also render runtime/error figures into DIR")

    sub.add_parser("verify", help="run the built-in correctness checks")
    return parser


def _cmd_run(args) -> int:
    from . import bench

    spec = bench.ExperimentSpec(
        algorithms=tuple(a.strip() for a in args.algos.split(",") if a.strip()),
        sizes=args.sizes,
        sparsities=args.sparsities,
        trials=args.trials,
        seed=args.seed,
        loops=args.loops,
        est_loops=args.est_loops,
        include_setup=args.include_setup,
    )
    progress = None
    if not args.quiet:
        def progress(row):
            print(
                f"{row.algorithm:>6} n={row.n:<5} k={row.k:<4} trial={row.trial:<3} "
                f"time={row.wall_time_seconds:.4f}s err={row.error_metric:.3g} [{row.status}]"
            )
    rows = bench.run_experiment(spec, progress=progress)
    bench.write_rows_csv(rows, args.out)
    sidecar = os.path.splitext(args.out)[0] + ".json"
    bench.write_sidecar(spec, sidecar)
    if not args.quiet:
        print(f"wrote {len(rows)} rows to {args.out} (spec sidecar: {sidecar})")
    return 0


def _cmd_summarize(args) -> int:
    from . import bench, plots

    rows = bench.read_rows_csv(args.results)
    summary = bench.summarize(rows)
    tables = bench.summary_tables(summary)
    if args.format == "table":
        print(bench.render_tables_text(tables))
    else:
        print(bench.render_tables_csv(tables), end="")
    if args.figures:
        stem = os.path.splitext(os.path.basename(args.results))[0]
        for path in plots.save_all_figures(summary, args.figures, stem=stem):
            print(f"figure: {path}", file=sys.stderr)
    return 0


def _cmd_verify(_args) -> int:
    from . import verify

    return 0 if verify.run_checks() else 1


def main(argv=None) -> int:
    _apply_thread_env()
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "summarize":
        return _cmd_summarize(args)
    return _cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
