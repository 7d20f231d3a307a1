"""Command line entry point: ``vmof run|compare|front|bench-scaling``."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from vmof import kernels
from vmof.benchmarks import load_front_csv
from vmof.errors import VmofError
from vmof.harness.experiment import load_plan, read_results, run_experiment
from vmof.harness.report import compare_table, format_table
from vmof.harness.scaling import DEFAULT_DIMS, bench_scaling, loglog_slope


def _cmd_run(args) -> int:
    plan = load_plan(args.plan)

    def progress(rec):
        status = rec.error or f"igd={rec.igd:.6g} hv={rec.hv:.6g}"
        print(f"{rec.algorithm} {rec.problem} seed={rec.seed} {status} ({rec.wall_time_s:.1f}s)", file=sys.stderr)

    records = run_experiment(plan, args.out, workers=args.workers, progress=None if args.quiet else progress)
    failed = [r for r in records if r.error]
    print(f"{len(records) - len(failed)} of {len(records)} cells succeeded; results in {args.out}", file=sys.stderr)
    return 1 if failed else 0


def _cmd_compare(args) -> int:
    records = read_results(args.results)
    rows = compare_table(records, args.baseline, args.metric, args.alpha)
    sys.stdout.write(format_table(rows, args.baseline, args.metric))
    return 0


def _read_front_meta(path: Path) -> dict[str, str]:
    meta = {}
    for line in path.read_text().splitlines():
        if not line.startswith("#"):
            break
        key, sep, value = line[1:].strip().partition("=")
        if sep:
            meta[key] = value
    return meta


def _cmd_front(args) -> int:
    root = Path(args.results_dir)
    folder = root / "fronts" if (root / "fronts").is_dir() else root
    files = sorted(folder.glob("*.csv"))
    if not files:
        print(f"no front files under {folder}", file=sys.stderr)
        return 1
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        width = 0
        for path in files:
            meta = _read_front_meta(path)
            F = load_front_csv(path).points
            F = F[kernels.nondominated_mask(F)]
            F = F[np.lexsort(F.T[::-1])]
            if F.shape[1] > width:
                width = F.shape[1]
                w.writerow(["algorithm", "problem", "seed"] + [f"f{i + 1}" for i in range(width)])
            for row in F:
                w.writerow([meta.get("algorithm", path.stem), meta.get("problem", ""), meta.get("seed", "")] + [format(v, ".17g") for v in row])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_bench_scaling(args) -> int:
    dims = args.dims or list(DEFAULT_DIMS)
    rows = bench_scaling(dims, repeats=args.repeats, population_size=args.population_size)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["d", "seconds", "evaluations", "seconds_per_evaluation"])
        for d, sec, evals in rows:
            w.writerow([d, format(sec, ".6g"), evals, format(sec / evals, ".6g")])
    finally:
        if out is not sys.stdout:
            out.close()
    if len(rows) > 1:
        slope = loglog_slope([r[0] for r in rows], [r[1] / r[2] for r in rows])
        print(f"log-log slope of seconds per evaluation against d: {slope:.3f} (backend {kernels.BACKEND})", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vmof", description="Direction sampling and fine-tuning for large multiobjective problems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every cell of a plan file")
    p.add_argument("plan")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("compare", help="median table with rank-sum marks against a baseline")
    p.add_argument("results")
    p.add_argument("--baseline", default="vmof")
    p.add_argument("--metric", choices=["igd", "hv"], default="igd")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("front", help="non-dominated objective vectors of every run as one CSV")
    p.add_argument("results_dir")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_front)

    p = sub.add_parser("bench-scaling", help="time one iteration at growing dimension")
    p.add_argument("--dims", type=int, nargs="+")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--population-size", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bench_scaling)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # reader went away (e.g. piped into head)
        sys.stderr.close()
        return 0
    except (VmofError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
