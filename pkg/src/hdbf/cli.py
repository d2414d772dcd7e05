"""Command-line front end.

Exit status: 0 on success, 1 on data or runtime errors, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import sys

from . import simulation
from .io import CsvSpec, load_group
from .models import ModelSpec
from .results import DegenerateDataError, Method
from .simulation import CSV_VERSION_LINE

RESULT_COLUMNS = ("method", "statistic", "p_value", "reject", "alpha", "b", "seed")


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _level(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {v}")
    return v


def _nonneg_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {v}")
    return v


def _method(text):
    try:
        return Method(text.upper())
    except ValueError:
        choices = ", ".join(m.value for m in Method)
        raise argparse.ArgumentTypeError(f"unknown method {text!r}; choose from {choices}") from None


def _model_name(text):
    t = text.strip()
    if t.upper() in ("I", "II", "III", "IV"):
        return t.upper()
    if t.lower().startswith("gamma:"):
        try:
            g = float(t.split(":", 1)[1])
        except ValueError:
            g = -1.0
        if 0.0 <= g <= 1.0:
            return t.lower()
    raise argparse.ArgumentTypeError(f"unknown model {text!r}; use I, II, III, IV or gamma:G with G in [0, 1]")


def _method_list(text):
    return [_method(t) for t in text.split(",") if t.strip()]


def _grid(text):
    return [_level(t) for t in text.split(",") if t.strip()]


def _add_groups(p):
    p.add_argument("--group1", required=True, help="CSV file, one observation per row")
    p.add_argument("--group2", required=True, help="CSV file, one observation per row")
    p.add_argument("--header", action="store_true", help="skip the first line of each file")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--transpose", action="store_true", help="files store variables as rows")


def _add_model(p, beta=True):
    p.add_argument("--model", type=_model_name, required=True, help="I, II, III, IV or gamma:G")
    p.add_argument("--n1", type=_positive_int, required=True)
    p.add_argument("--n2", type=_positive_int, required=True)
    p.add_argument("--p", type=_positive_int, required=True)
    if beta:
        p.add_argument("--beta", type=_nonneg_float, default=0.0)


def _add_resampling(p, alpha=True):
    p.add_argument("--b", type=_positive_int, default=1000, help="resampling draws per test")
    if alpha:
        p.add_argument("--alpha", type=_level, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=None, help="worker threads (default: HDBF_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdbf", description="High-dimensional two-sample mean tests")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="test two data files")
    _add_groups(p)
    p.add_argument("--method", type=_method, default=Method.NEW)
    _add_resampling(p)
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="empirical size or power on a simulation model")
    _add_model(p)
    p.add_argument("--reps", type=_positive_int, default=simulation.DESK_REPS)
    _add_resampling(p)
    p.add_argument("--methods", type=_method_list, default=[Method.NEW])
    p.add_argument("--out", required=True)

    p = sub.add_parser("qq", help="QQ pairs of T_CQ / sigma against a reference law")
    p.add_argument("--mode", default="qf", help="qf (Gaussian quadratic form) or gamma:G (limiting mixture)")
    p.add_argument("--model", type=_model_name, default=None, help="model for qf mode: I, II, III, IV or gamma:G")
    p.add_argument("--n1", type=_positive_int, required=True)
    p.add_argument("--n2", type=_positive_int, required=True)
    p.add_argument("--p", type=_positive_int, required=True)
    p.add_argument("--reps", type=_positive_int, default=10_000)
    p.add_argument("--n-ref", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("roc", help="power over a grid of levels")
    _add_model(p)
    p.add_argument("--method", type=_method, default=Method.NEW)
    p.add_argument("--reps", type=_positive_int, default=simulation.DESK_REPS)
    _add_resampling(p, alpha=False)
    p.add_argument("--grid", type=_grid, default=[0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9])
    p.add_argument("--out", required=True)

    p = sub.add_parser("resample-size", help="sizes on data resampled from centered groups")
    _add_groups(p)
    p.add_argument("--methods", type=_method_list, default=[Method.NEW])
    p.add_argument("--reps", type=_positive_int, default=simulation.DESK_REPS)
    _add_resampling(p)
    p.add_argument("--out", required=True)
    return parser


def _load(args):
    kw = dict(has_header=args.header, delimiter=args.delimiter, transpose=args.transpose)
    return load_group(CsvSpec(args.group1, **kw)), load_group(CsvSpec(args.group2, **kw))


def _cmd_test(args):
    x1, x2 = _load(args)
    res = simulation.run_method(args.method, x1, x2, args.b, args.alpha, args.seed)
    print(res.summary())
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(CSV_VERSION_LINE + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RESULT_COLUMNS)
            writer.writerow(
                [
                    res.method, repr(res.statistic), repr(res.p_value), str(res.reject).lower(), repr(res.alpha),
                    res.b_resamples, "" if res.seed is None else res.seed,
                ]
            )  # fmt: skip


def _cmd_simulate(args):
    model = ModelSpec.parse(args.model, args.n1, args.n2, args.p)
    run = dict(reps=args.reps, b=args.b, alpha=args.alpha, seed=args.seed, workers=args.threads)
    if args.beta > 0:
        report = simulation.run_power_experiment(model, args.beta, args.methods, **run)
    else:
        report = simulation.run_size_experiment(model, args.methods, **run)
    report.write_csv(args.out)
    print(f"model={report.label} n1={report.n1} n2={report.n2} p={report.p} beta={report.beta:g} R={report.reps} {report.summary()}")


def _cmd_qq(args):
    if args.mode.lower().startswith("gamma:"):
        model = ModelSpec.parse(args.mode, args.n1, args.n2, args.p)
        mode = "mixture"
    elif args.mode == "qf":
        if args.model is None:
            raise SystemExit(_usage("qq --mode qf needs --model"))
        model = ModelSpec.parse(args.model, args.n1, args.n2, args.p)
        mode = "qf"
    else:
        raise SystemExit(_usage(f"unknown --mode {args.mode!r}; use qf or gamma:G"))
    pairs = simulation.qq_pairs(model, args.reps, args.seed, args.n_ref, mode, workers=args.threads)
    simulation.write_pairs_csv(args.out, pairs, ("empirical_quantile", "reference_quantile"))
    print(f"qq model={model.label} mode={mode} points={len(pairs)}")


def _cmd_roc(args):
    model = ModelSpec.parse(args.model, args.n1, args.n2, args.p)
    curve = simulation.roc_curve(model, args.beta, args.method, args.reps, args.b, args.seed, args.grid, args.threads)
    simulation.write_pairs_csv(args.out, curve, ("alpha", "power"))
    print(f"roc model={model.label} method={args.method} " + " ".join(f"{a:g}:{pw:.4f}" for a, pw in curve))


def _cmd_resample(args):
    x1, x2 = _load(args)
    report = simulation.resampled_null_sizes(x1, x2, args.methods, args.reps, args.b, args.alpha, args.seed, args.threads)
    report.write_csv(args.out)
    print(f"resample-size n1={report.n1} n2={report.n2} p={report.p} R={report.reps} {report.summary()}")


def _usage(msg):
    print(f"hdbf: error: {msg}", file=sys.stderr)
    return 2


COMMANDS = {
    "test": _cmd_test,
    "simulate": _cmd_simulate,
    "qq": _cmd_qq,
    "roc": _cmd_roc,
    "resample-size": _cmd_resample,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ValueError, DegenerateDataError, OSError) as exc:
        print(f"hdbf: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
