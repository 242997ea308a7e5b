"""Command-line front end: ``hdrm single``, ``hdrm grouped`` and ``hdrm simulate``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from . import engine
from .data import Dataset, read_long_csv, read_matrix_csv, read_wide_csv
from .engine import TestResult
from .estimators._common import SubsampleBudget
from .exceptions import BudgetError, HdrmError
from .hypotheses import PREDEFINED, HypothesisSpec
from .simulate import run_config_file, write_rows

log = logging.getLogger(__name__)

P_FLOOR = 1e-4


def _num(x: float) -> str:
    """Value rounded to 4 decimals without trailing zeros (``1``, ``3.1657``)."""
    if not math.isfinite(x):
        return str(x)
    return format(round(x, 4) + 0.0, ".7g")


def _pvalue(p: float) -> str:
    return "p.value < 1e-04" if p < P_FLOOR else f"p.value = {_num(p)}"


def render_text(result: TestResult) -> str:
    stats = f"W = {_num(result.statistic_w)}  f = {_num(result.f_hat)}  {_pvalue(result.p_value)} \n"
    tail = f"Hypothesis type: {result.hypothesis_label} \nConvergence parameter tau = {_num(result.tau_hat)}\n"
    if result.design == "single":
        head = (
            "      One Group Repeated Measure\n       \n"
            f"Analysis of {result.n_total} subjects in {result.dimension} dimensions: \n"
        )
    else:
        # the heteroscedastic report carries one more spacer line
        spacer = "      \n" if result.cov_equal else "      \n      \n"
        head = (
            f"      Multi Group Repeated Measure\n{spacer}"
            f"Analysis of {result.n_total} individuals in {result.groups} groups "
            f"and {result.dimension} dimensions: \n"
        )
    return head + stats + tail


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def render_json(result: TestResult, alpha: float | None = None) -> str:
    out = result.to_dict()
    if alpha is not None:
        out["alpha"] = alpha
        out["reject"] = result.reject(alpha)
    return json.dumps(_jsonable(out), indent=2, sort_keys=True) + "\n"


def render_report(result: TestResult, fmt: str = "text", alpha: float | None = None) -> str:
    if fmt == "json":
        return render_json(result, alpha)
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    text = render_text(result)
    if alpha is not None:
        verdict = "rejected" if result.reject(alpha) else "not rejected"
        text += f"Null hypothesis {verdict} at alpha = {_num(alpha)}\n"
    return text


# argument handling

def _budget(text: str) -> str:
    try:
        SubsampleBudget.parse(text)
    except BudgetError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return text


def _alpha(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        value = math.nan
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text!r}")
    return value


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="CSV file with the observations")
    p.add_argument("--format", choices=("wide", "long"), default="wide",
                   help="wide: headerless, one subject per column; long: value/subject/group columns")
    p.add_argument("--subject", default="subject", help="subject column (long format)")
    p.add_argument("--value", default="value", help="value column (long format)")
    p.add_argument("--no-am", dest="am", action="store_false",
                   help="evaluate quadratic forms with the full projection instead of its companion factor")
    p.add_argument("--seed", type=int, default=None, help="seed for subsampled estimators")
    p.add_argument("--alpha", type=_alpha, default=None, help="also report the test decision at this level")
    p.add_argument("--json", action="store_true", help="print every result field as JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdrm", description="High-dimensional repeated-measures mean tests.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    single = sub.add_parser("single", help="one-group test of T mu = 0")
    _common(single)
    single.add_argument("--hypothesis", default="flat",
                        help="'flat' or a CSV file holding a custom d x d projection")
    single.add_argument("--group", default=None, help="ignored group column (long format)")

    grouped = sub.add_parser("grouped", help="multi-group test of (T_W kron T_S) mu = 0")
    _common(grouped)
    grouped.add_argument("--hypothesis", default="whole",
                         help=f"one of {', '.join(PREDEFINED)}, or 'custom' with --tw and --ts")
    grouped.add_argument("--tw", default=None, help="CSV with the a x a whole-plot projection")
    grouped.add_argument("--ts", default=None, help="CSV with the d x d sub-plot projection")
    grouped.add_argument("--group", default=None,
                         help="label file, one label per subject (wide) or group column name (long)")
    grouped.add_argument("--cov-equal", action="store_true", help="assume a common covariance matrix")
    grouped.add_argument("--subsampling", action="store_true",
                         help="subsample the lower-order trace estimators as well")
    grouped.add_argument("--budget", type=_budget, default="1000*N",
                         help="number of random index tuples, '<int>' or '<int>*N' (default 1000*N)")

    sim = sub.add_parser("simulate", help="run Monte Carlo experiments from a config file")
    sim.add_argument("--config", required=True, help="key = value experiment file, one [section] each")
    sim.add_argument("--out", default=None, help="CSV destination (default stdout)")
    return parser


def _load(args, grouped: bool) -> Dataset:
    if args.format == "wide":
        labels = args.group if grouped else None
        return read_wide_csv(args.data, labels)
    group_col = args.group if args.group is not None else ("group" if grouped else None)
    return read_long_csv(args.data, args.value, args.subject, group_col)


def _single_spec(text: str) -> HypothesisSpec:
    if text.strip().lower() in PREDEFINED:
        return HypothesisSpec.parse(text)
    return HypothesisSpec.custom_single(read_matrix_csv(text))


def _grouped_spec(args) -> HypothesisSpec:
    if args.tw is not None or args.ts is not None or args.hypothesis.strip().lower() == "custom":
        if args.tw is None or args.ts is None:
            raise HdrmError("a custom grouped hypothesis needs both --tw and --ts")
        return HypothesisSpec.custom_grouped(read_matrix_csv(args.tw), read_matrix_csv(args.ts))
    return HypothesisSpec.parse(args.hypothesis)


def _emit(result: TestResult, args) -> None:
    sys.stdout.write(render_report(result, "json" if args.json else "text", args.alpha))
    for msg in result.warnings:
        log.warning("%s", msg)


def _run(args) -> None:
    if args.command == "single":
        ds = _load(args, grouped=False)
        _emit(engine.run_single(ds, _single_spec(args.hypothesis), am=args.am), args)
    elif args.command == "grouped":
        ds = _load(args, grouped=True)
        result = engine.run_grouped(
            ds, _grouped_spec(args), cov_equal=args.cov_equal, subsampling=args.subsampling,
            budget=args.budget, seed=args.seed, am=args.am,
        )
        _emit(result, args)
    else:
        rows = run_config_file(args.config)
        if args.out is None:
            write_rows(rows, sys.stdout)
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as handle:
                write_rows(rows, handle)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="hdrm: %(message)s", stream=sys.stderr)
    try:
        _run(args)
    except (HdrmError, OSError) as exc:
        msg = str(exc)
        if isinstance(exc, OSError) and exc.filename and str(exc.filename) not in msg:
            msg = f"{msg}: {exc.filename}"
        print(f"hdrm: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
