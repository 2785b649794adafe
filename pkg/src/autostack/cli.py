"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 budget error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import bench
from .automl import load_manifest, run_manifest
from .errors import AutoStackError, BudgetError, DataError
from .frame import class_counts, load_csv
from .learners import load_space_overrides
from .metrics import report

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BUDGET = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_column(path) -> np.ndarray:
    if not os.path.isfile(path):
        raise DataError(f"no such file: {path}")
    values = []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if i == 0:
                    continue  # header
                raise DataError(f"{path}: line {i + 1} is not a number: {row[0]!r}") from None
    return np.asarray(values)


def _cmd_automl_run(args) -> int:
    board = run_manifest(load_manifest(args.config))
    print(board.format_table())
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "leaderboard.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(board.to_csv())
    print(f"\nleaderboard csv written to {path}")
    return EXIT_OK


def _cmd_bench_run(args) -> int:
    names = bench.CASE_NAMES if args.case == "all" else (args.case,)
    overrides = {}
    if args.grid_points is not None:
        overrides["manual_grid_points"] = args.grid_points
    if args.random_draws is not None:
        overrides["manual_random_draws"] = args.random_draws
    if args.max_models is not None:
        overrides["automl_max_models"] = args.max_models
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.space_overrides:
        overrides["spaces"] = load_space_overrides(args.space_overrides)
    reports = []
    for name in names:
        cfg = bench.case_config(name, args.data_dir, **overrides)
        runs = bench.run_multi_seed(cfg, args.seeds)
        reports.extend(runs)
        if args.seeds > 1:
            print(bench.summarize_seeds(runs))
    print(bench.emit_report(reports, "table"))
    if args.out:
        for path in bench.write_outputs(reports, args.out):
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_metrics_eval(args) -> int:
    labels = _read_column(args.labels)
    scores = _read_column(args.scores)
    rep = report(labels, scores, args.threshold)
    for key, value in rep.as_dict().items():
        print(f"{key}: {value:.6f}")
    return EXIT_OK


def _cmd_data_inspect(args) -> int:
    categorical = [c for c in (args.categorical or "").split(",") if c]
    frame = load_csv(args.csv, args.response, categorical, delimiter=args.delimiter)
    n_pos, n_neg = class_counts(frame)
    print(f"rows: {frame.n_rows}")
    print(f"features: {len(frame.feature_names)}")
    for col in frame.schema:
        extra = f" ({len(col.declared_levels)} levels)" if col.declared_levels is not None else ""
        print(f"  {col.name}: {col.kind}{extra}")
    print(f"class counts: y=0 {n_neg}, y=1 {n_pos}")
    return EXIT_OK


def _cmd_data_surrogate(args) -> int:
    from .synthetic import write_surrogate

    path = os.path.join(args.out, bench.case_filename(args.case))
    write_surrogate(args.case, path, args.rows, args.seed)
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="autostack", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    automl = groups.add_parser("automl").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = automl.add_parser("run", help="run the AutoML search described by a manifest")
    p.add_argument("--config", required=True, help="run manifest (key = value lines)")
    p.add_argument("--out", help="directory for leaderboard.csv (default: current directory)")
    p.set_defaults(func=_cmd_automl_run)

    bench_cmds = groups.add_parser("bench").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = bench_cmds.add_parser("run", help="reproduce the case-study comparison")
    p.add_argument("--case", required=True, choices=list(bench.CASE_NAMES) + ["all"])
    p.add_argument("--data-dir", required=True)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--grid-points", type=int, help="manual-arm grid points per axis (default 3)")
    p.add_argument("--random-draws", type=int, help="manual-arm random draws per family (default 25)")
    p.add_argument("--max-models", type=int, help="AutoML candidate budget (default 20)")
    p.add_argument("--workers", type=int)
    p.add_argument("--space-overrides", help="hyperparameter space override file for both arms")
    p.set_defaults(func=_cmd_bench_run)

    metrics = groups.add_parser("metrics").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = metrics.add_parser("eval", help="score predictions against labels")
    p.add_argument("--labels", required=True, help="one-column csv of 0/1 labels")
    p.add_argument("--scores", required=True, help="one-column csv of probabilities")
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=_cmd_metrics_eval)

    data = groups.add_parser("data").add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = data.add_parser("inspect", help="print schema and class counts of a csv")
    p.add_argument("csv")
    p.add_argument("--response", required=True)
    p.add_argument("--categorical", help="comma-separated categorical column names")
    p.add_argument("--delimiter", default=",")
    p.set_defaults(func=_cmd_data_inspect)
    p = data.add_parser("surrogate", help="write a synthetic file with a case study's schema")
    p.add_argument("--case", required=True, choices=list(bench.CASE_NAMES))
    p.add_argument("--rows", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="directory to write into")
    p.set_defaults(func=_cmd_data_surrogate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except AutoStackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
