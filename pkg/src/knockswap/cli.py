"""Command-line entry point: fit paths, run selections, drive simulations."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import changepoint, knockoffs
from .data import CUMULATIVE_LOGIT, Dataset, InputFormatError, standardize
from .harness import ExperimentConfig, run_experiment
from .solvers import SolverError, SolverOptions, fit_path

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

_FAMILY_CHOICES = ("linear", "logistic", "cumlogit")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _solver_options(args) -> SolverOptions:
    return SolverOptions(grid_size=args.grid_size, grid_ratio=args.grid_ratio)


def _add_solver_flags(parser):
    parser.add_argument("--grid-size", type=int, default=100)
    parser.add_argument("--grid-ratio", type=float, default=1e-3)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="knockswap",
                     description="Knockoff-based variable selection for penalised regressions")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a regularization path and export it as CSV")
    fit.add_argument("data", help="CSV with a 'y' column")
    fit.add_argument("--family", choices=_FAMILY_CHOICES, required=True)
    _add_solver_flags(fit)
    fit.add_argument("--out", default=".", help="output directory")

    sel = sub.add_parser("select", help="run the knockoff selection procedure")
    sel.add_argument("data", help="CSV with a 'y' column")
    sel.add_argument("--family", choices=_FAMILY_CHOICES, required=True)
    sel.add_argument("--method", choices=("stats", "gaps", "manual"), default="stats")
    sel.add_argument("--threshold", type=float, default=None,
                     help="threshold for --method manual")
    sel.add_argument("--seed", type=int, default=None,
                     help="knockoff seed; omit for fresh randomness")
    _add_solver_flags(sel)
    sel.add_argument("--print", dest="show", action="store_true",
                     help="print the sorted positive statistics")
    sel.add_argument("--out", default=".", help="output directory")

    sim = sub.add_parser("simulate", help="run a detection-rate experiment")
    sim.add_argument("config", help="experiment config JSON")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", default=".", help="output directory")
    return parser


def _cmd_fit(args) -> int:
    dataset = Dataset.from_csv(args.data, args.family)
    X_std, _, _ = standardize(dataset.X)
    path = fit_path(Dataset(X_std, dataset.y, dataset.family), _solver_options(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path.to_csv(out / "path.csv")
    print(f"wrote {out / 'path.csv'} ({path.grid_size} grid points)")
    return EXIT_OK


def _print_sorted(sorted_w: changepoint.SortedPositiveW, s: float | None) -> None:
    print(f"{'rank':>4} {'covariate':>9} {'W':>14}")
    for rank, (idx, val) in enumerate(zip(sorted_w.indices, sorted_w.values), start=1):
        print(f"{rank:>4} {idx + 1:>9} {val:>14.6g}")
    if s is not None:
        print(f"threshold s = {s:.6g}")


def _cmd_select(args) -> int:
    dataset = Dataset.from_csv(args.data, args.family)
    run = knockoffs.knockoff_statistics(dataset, _solver_options(args), args.seed)
    sorted_w = changepoint.SortedPositiveW.from_statistics(run.W)

    if args.method == "manual":
        if args.threshold is None:
            _print_sorted(sorted_w, None)
            args.threshold = float(input("threshold s: "))
        result = changepoint.manual_threshold(args.threshold)
        selected = knockoffs.select(run.W, result.s)
    else:
        try:
            if args.method == "stats":
                result = changepoint.w_threshold(sorted_w)
            else:
                result = changepoint.gaps_threshold(sorted_w)
            selected = knockoffs.select(run.W, result.s)
        except changepoint.EmptySelection:
            result = None
            selected = np.array([], dtype=int)

    if args.show:
        _print_sorted(sorted_w, result.s if result else None)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    knockoffs.write_statistics_csv(out / "statistics.csv", run, selected)
    payload = {
        "indices": [int(i) + 1 for i in selected],
        "s": None if result is None else result.s,
        "method": args.method,
        "seed": args.seed,
    }
    with open(out / "selection.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"selected {len(selected)} covariates -> {out / 'selection.json'}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    report = run_experiment(config, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / "report.csv")
    report.write_summary_json(out / "summary.json")
    print(f"wrote {out / 'report.csv'} and {out / 'summary.json'}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "select":
            return _cmd_select(args)
        return _cmd_simulate(args)
    except (InputFormatError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"knockswap: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"knockswap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, np.linalg.LinAlgError) as exc:
        print(f"knockswap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
