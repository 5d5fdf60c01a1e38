"""Command-line interface: ``infpush {train,predict,eval,synth,tune,bench}``.

Exit codes are 0 on success, 1 on usage errors and 2 on runtime failures.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from .admm import fit, predict
from .core import SolverConfig
from .data import (DataFormatError, ToySpec, apply_normalizer,
                   fit_normalizer, generate_toy, load_csv, load_model, save_csv,
                   save_model)
from .experiments import METRICS, bench, tune_lambda
from .metrics import RankScores, feature_metrics, infinite_push_loss, pos_at_top_rate

log = logging.getLogger("infpush")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None


def _write_json(path, doc):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def _solver_config(args):
    kw = {}
    if args.mu is not None:
        kw["mu"] = args.mu
    if args.outer_tol is not None:
        kw["outer_tol"] = args.outer_tol
    if args.max_iter is not None:
        kw["outer_max_iter"] = args.max_iter
    try:
        return SolverConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _ranking_metrics(model, data):
    """Score raw (unnormalized) ``data`` with ``model``."""
    pos = np.atleast_1d(predict(model, data.positives))
    neg = np.atleast_1d(predict(model, data.negatives))
    scores = RankScores(pos, neg)
    return {"infpush_loss": infinite_push_loss(scores),
            "pos_at_top": pos_at_top_rate(scores)}


def _fit_report(lam, report, metrics, **extra):
    doc = {"lambda": lam, "objective": report.objective, "residual": report.residual,
           "iterations": report.iterations, "nonzeros": report.nonzero_count,
           "converged": report.converged, "mu": report.mu, "metrics": metrics}
    doc.update(extra)
    return doc


def _normalized(data):
    stats = fit_normalizer(data)
    return stats, apply_normalizer(stats, data)


def _finish_fit(args, model, report, stats, data, extra=None):
    model.normalization_stats = stats.pairs()
    save_model(model, args.out)
    metrics = _ranking_metrics(model, data)
    doc = _fit_report(model.lam, report, metrics, **(extra or {}))
    print(f"iterations={report.iterations} objective={report.objective:.6g} "
          f"residual={report.residual:.3e} nonzeros={report.nonzero_count} "
          f"converged={str(report.converged).lower()}")
    if args.report:
        _write_json(args.report, doc)
    if args.require_convergence and not report.converged:
        log.error("solver stopped at the iteration cap without converging")
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_train(args):
    cfg = _solver_config(args)
    data = load_csv(args.data)
    stats, norm = _normalized(data)
    model, report = fit(norm, args.lam, args.reg, cfg)
    return _finish_fit(args, model, report, stats, data)


def cmd_tune(args):
    cfg = _solver_config(args)
    if not args.grid:
        raise UsageError("--grid is empty")
    if any(not lam > 0 for lam in args.grid):
        raise UsageError(f"grid values must be > 0, got {args.grid}")
    if not 0 < args.split < 1:
        raise UsageError(f"--split must lie in (0, 1), got {args.split}")
    data = load_csv(args.data)
    stats, norm = _normalized(data)
    res = tune_lambda(norm, args.grid, args.reg, split_fraction=args.split,
                      metric=args.metric, seed=args.seed, cfg=cfg)
    for lam, sc in zip(res.lambdas, res.scores):
        print(f"lambda={lam:g} {args.metric}={sc:.6g}")
    print(f"best lambda={res.best_lambda:g}")
    extra = {"grid": res.lambdas, "validation_scores": res.scores,
             "validation_metric": args.metric, "seed": args.seed}
    return _finish_fit(args, res.model, res.report, stats, data, extra)


def _read_features(path, d):
    """Feature rows from a CSV; a leading label column is dropped when the
    row width is ``d + 1``."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            cells = [c.strip() for c in line.strip().split(",")]
            if cells == [""]:
                continue
            try:
                values = [float(c) for c in cells]
            except ValueError:
                if lineno == 1:
                    continue
                raise DataFormatError(f"{path}:{lineno}: non-numeric value") from None
            if len(values) == d + 1:
                values = values[1:]
            if len(values) != d:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {d} features, got {len(values)}")
            rows.append(values)
    return np.array(rows, dtype=float).reshape(-1, d)


def cmd_predict(args):
    model = load_model(args.model)
    x = _read_features(args.data, model.d)
    scores = np.atleast_1d(predict(model, x)) if len(x) else np.empty(0)
    text = "".join(f"{s:.17g}\n" for s in scores)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_eval(args):
    model = load_model(args.model)
    data = load_csv(args.data)
    if data.d != model.d:
        raise DataFormatError(f"model has {model.d} features, data has {data.d}")
    metrics = _ranking_metrics(model, data)
    selected = model.selected()
    metrics["nonzeros"] = len(selected)
    if args.relevant is not None:
        bad = [i for i in args.relevant if not 0 <= i < model.d]
        if bad:
            raise UsageError(f"relevant indices out of range [0, {model.d}): {bad}")
        p, r, f = feature_metrics(selected, args.relevant)
        metrics.update(precision=p, recall=r, f_measure=f)
    for key, value in metrics.items():
        print(f"{key}={value:.6g}" if isinstance(value, float) else f"{key}={value}")
    if args.report:
        _write_json(args.report, {"lambda": model.lam, "nonzeros": len(selected),
                                  "metrics": metrics})
    return EXIT_OK


def relevant_sidecar(path):
    return f"{path}.relevant"


def cmd_synth(args):
    try:
        spec = ToySpec(args.d, args.r, args.n, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data, relevant = generate_toy(spec)
    save_csv(data, args.out)
    with open(relevant_sidecar(args.out), "w", encoding="utf-8") as fh:
        fh.write(",".join(str(i) for i in sorted(relevant)) + "\n")
    print(f"wrote {data.m + data.n} rows to {args.out}")
    return EXIT_OK


def cmd_bench(args):
    if any(s < 2 for s in args.sizes):
        raise UsageError(f"sizes must be >= 2, got {args.sizes}")
    if not 1 <= args.r <= args.d:
        raise UsageError(f"need 1 <= r <= d, got r={args.r}, d={args.d}")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    cfg = _solver_config(args)
    rows, slope = bench(args.sizes, d=args.d, r=args.r, seed=args.seed,
                        trials=args.trials, lam=args.lam, reg=args.reg, cfg=cfg)
    print(f"{'size':>8} {'m*n':>8} {'time_s':>10} {'iters':>6}")
    for row in rows:
        print(f"{row.size:>8} {row.pairs:>8} {row.median_time:>10.4f} "
              f"{int(np.median(row.iterations)):>6}")
    print(f"slope p = {slope:.2f}")
    if args.report:
        _write_json(args.report, {
            "rows": [{"size": r.size, "pairs": r.pairs, "times": r.times,
                      "median_time": r.median_time, "iterations": r.iterations}
                     for r in rows],
            "slope": slope, "lambda": args.lam, "regularizer": args.reg,
            "d": args.d, "r": args.r, "seed": args.seed})
    return EXIT_OK


def _add_solver_flags(p):
    p.add_argument("--mu", type=_positive, help="ADMM penalty (default: automatic)")
    p.add_argument("--outer-tol", type=_positive)
    p.add_argument("--max-iter", type=int, help="outer ADMM iteration cap")


def _add_fit_outputs(p):
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--report", help="JSON report file to write")
    p.add_argument("--require-convergence", action="store_true",
                   help="exit 2 if ADMM hits its iteration cap")


def build_parser():
    parser = _Parser(prog="infpush", description="Sparse support vector infinite push.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="fit a model on a labeled CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--lambda", dest="lam", type=_positive, required=True)
    p.add_argument("--reg", choices=("l1", "l2"), default="l1")
    _add_fit_outputs(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tune", help="pick lambda on a hold-out split and refit")
    p.add_argument("--data", required=True)
    p.add_argument("--grid", type=_float_list, required=True, help="comma list of lambdas")
    p.add_argument("--reg", choices=("l1", "l2"), default="l1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, default=0.7)
    p.add_argument("--metric", choices=METRICS, default="pos_at_top")
    _add_fit_outputs(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("predict", help="score feature rows")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="ranking and feature-selection metrics")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--relevant", type=_int_list)
    p.add_argument("--report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a toy dataset")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="time fits over training sizes")
    p.add_argument("--sizes", type=_int_list, default=[40, 80, 160, 320])
    p.add_argument("--d", type=int, default=30)
    p.add_argument("--r", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--lambda", dest="lam", type=_positive, default=0.1)
    p.add_argument("--reg", choices=("l1", "l2"), default="l1")
    p.add_argument("--report")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"infpush {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, DataFormatError, ValueError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"infpush {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
