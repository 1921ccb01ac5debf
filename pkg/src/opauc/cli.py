"""Command-line surface: train, eval, bench, trace, scale.

Exit codes: 0 success, 1 usage error, 2 data error.  Reports and traces are
written as JSON/CSV; a figure lands next to each written file unless
--no-plot is given.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .baselines import train_projected, train_univariate
from .data import ParseError, ScalingParams, fit_scaling, load_libsvm, scale_dataset, \
    serialize_libsvm
from .evaluation import auc, geometric_checkpoints, regret_trace
from .exact import StepPolicy, train_exact
from .harness import ALGOS, ExperimentConfig, HarnessError, run_cv
from .models import from_json, model_scores, to_json
from .sketch import train_sketch


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected comma-separated floats")


def _parse_labels(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad label list {text!r}")


def build_parser() -> _Parser:
    parser = _Parser(prog="opauc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("data", help="dataset in LIBSVM text format")
        p.add_argument("--positive-labels", type=_parse_labels, default=None,
                       help="comma-separated labels mapped to +1 (rest to -1)")

    p_train = sub.add_parser("train", help="fit one model, write model JSON")
    add_common(p_train)
    p_train.add_argument("--algo", choices=ALGOS, default="opauc")
    p_train.add_argument("--eta", type=float, default=2.0**-6)
    p_train.add_argument("--lambda", dest="lam", type=float, default=2.0**-10)
    p_train.add_argument("--tau", type=int, default=None)
    p_train.add_argument("--proj-dim", type=int, default=None)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--out", default=None, help="model JSON path (default stdout)")

    p_eval = sub.add_parser("eval", help="score a file with a model, print AUC")
    add_common(p_eval)
    p_eval.add_argument("--model", required=True, help="model JSON path")

    p_bench = sub.add_parser("bench", help="cross-validated grid-search benchmark")
    add_common(p_bench)
    p_bench.add_argument("--algo", choices=ALGOS, default="opauc")
    p_bench.add_argument("--folds", type=int, default=5)
    p_bench.add_argument("--trials", type=int, default=5)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--eta-grid", type=_parse_grid, default=None)
    p_bench.add_argument("--lambda-grid", type=_parse_grid, default=None)
    p_bench.add_argument("--tau", type=int, default=None)
    p_bench.add_argument("--proj-dim", type=int, default=None)
    p_bench.add_argument("--out", default=None, help="report path (default stdout)")
    p_bench.add_argument("--format", choices=("json", "csv"), default="json")
    p_bench.add_argument("--no-plot", action="store_true", help="skip the figure")

    p_trace = sub.add_parser("trace", help="emit a cumulative-loss trace CSV")
    add_common(p_trace)
    p_trace.add_argument("--eta", type=float, default=None)
    p_trace.add_argument("--policy", choices=("constant", "smoothness"), default="constant")
    p_trace.add_argument("--norm-bound", type=float, default=1.0)
    p_trace.add_argument("--loss-budget", type=float, default=0.0)
    p_trace.add_argument("--lambda", dest="lam", type=float, default=2.0**-10)
    p_trace.add_argument("--seed", type=int, default=0)
    p_trace.add_argument("--out", default=None, help="trace CSV path (default stdout)")
    p_trace.add_argument("--no-plot", action="store_true", help="skip the figure")

    p_scale = sub.add_parser("scale", help="fit or apply [-1, 1] feature scaling")
    p_scale.add_argument("mode", choices=("fit", "apply"))
    add_common(p_scale)
    p_scale.add_argument("--params", default=None, help="scaling params JSON (apply)")
    p_scale.add_argument("--out", default=None, help="output path (default stdout)")

    return parser


def _write_or_print(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text)


def _cmd_train(args) -> int:
    ds = load_libsvm(args.data, positive_labels=args.positive_labels)
    policy = StepPolicy(kind="constant", eta=args.eta)
    if args.algo == "opauc":
        model = train_exact(ds, args.lam, policy=policy, shuffle_seed=args.seed)
    elif args.algo == "opauc-r":
        if args.tau is None:
            raise UsageError("--tau is required for opauc-r")
        model = train_sketch(
            ds, args.lam, args.tau, policy=policy, seed=args.seed, shuffle_seed=args.seed
        )
    elif args.algo in ("opauc-f", "opauc-rp"):
        if args.proj_dim is None:
            raise UsageError("--proj-dim is required for opauc-f/opauc-rp")
        mode = "subsample" if args.algo == "opauc-f" else "gaussian_projection"
        model = train_projected(
            ds, args.lam, mode, args.proj_dim, policy=policy,
            seed=args.seed, shuffle_seed=args.seed,
        )
    else:
        kind = "square" if args.algo == "uni-squ" else "exponential"
        model = train_univariate(ds, args.lam, kind, policy=policy, shuffle_seed=args.seed)
    train_auc = auc(model_scores(model, ds), ds.labels)
    print(f"training AUC: {train_auc!r}")
    _write_or_print(to_json(model), args.out)
    return 0


def _cmd_eval(args) -> int:
    ds = load_libsvm(args.data, positive_labels=args.positive_labels)
    model = from_json(Path(args.model).read_text())
    print(f"AUC: {auc(model_scores(model, ds), ds.labels)!r}")
    return 0


def _cmd_bench(args) -> int:
    kwargs = {}
    if args.eta_grid is not None:
        kwargs["eta_grid"] = args.eta_grid
    if args.lambda_grid is not None:
        kwargs["lambda_grid"] = args.lambda_grid
    if args.algo == "opauc-r":
        if args.tau is None:
            raise UsageError("--tau is required for opauc-r")
        kwargs["tau"] = args.tau
    if args.algo in ("opauc-f", "opauc-rp"):
        if args.proj_dim is None:
            raise UsageError("--proj-dim is required for opauc-f/opauc-rp")
        kwargs["proj_dim"] = args.proj_dim
    config = ExperimentConfig(
        data_path=args.data,
        algo=args.algo,
        folds=args.folds,
        trials=args.trials,
        seed=args.seed,
        positive_labels=args.positive_labels,
        **kwargs,
    )
    report = run_cv(config)
    text = report.to_json() if args.format == "json" else report.to_csv()
    _write_or_print(text, args.out)
    if args.out is not None and not args.no_plot:
        from .plots import save_bench_figure

        save_bench_figure(report, str(Path(args.out).with_suffix(".png")))
    return 0


def _cmd_trace(args) -> int:
    ds = load_libsvm(args.data, positive_labels=args.positive_labels)
    if args.policy == "smoothness":
        policy = StepPolicy(
            kind="smoothness",
            norm_bound=args.norm_bound,
            loss_budget=args.loss_budget,
            horizon=len(ds),
        )
    else:
        policy = StepPolicy(kind="constant", eta=args.eta if args.eta is not None else 2.0**-6)
    trace, _ = regret_trace(
        ds, args.lam, policy=policy, shuffle_seed=args.seed,
        checkpoints=geometric_checkpoints(len(ds)),
    )
    _write_or_print(trace.to_csv(), args.out)
    if args.out is not None and not args.no_plot:
        from .plots import save_trace_figure

        save_trace_figure(trace.steps, trace.cum_loss, str(Path(args.out).with_suffix(".png")))
    return 0


def _cmd_scale(args) -> int:
    ds = load_libsvm(args.data, positive_labels=args.positive_labels)
    if args.mode == "fit":
        _write_or_print(fit_scaling(ds).to_json(), args.out)
        return 0
    if args.params is None:
        raise UsageError("--params is required for scale apply")
    params = ScalingParams.from_json(Path(args.params).read_text())
    _write_or_print(serialize_libsvm(scale_dataset(ds, params)), args.out)
    return 0


class UsageError(Exception):
    pass


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "train": _cmd_train,
        "eval": _cmd_eval,
        "bench": _cmd_bench,
        "trace": _cmd_trace,
        "scale": _cmd_scale,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"opauc: error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, HarnessError) as exc:
        print(f"opauc: data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"opauc: data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"opauc: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
