"""Command-line entry point: ``sesrff-bench <command> [options]``."""

import argparse
import logging
import sys

from ..exceptions import SESError
from . import experiments
from .records import format_records

log = logging.getLogger("sesrff.bench")

COMMANDS = {
    "approx": "relative kernel approximation error per (method, M, seed)",
    "train": "ridge / L2-SVM test error on weighted features",
    "weights": "raw and normalised BQ / SES weights for histograms",
    "sketch-sweep": "SES error against the number of sketched rows r",
    "shrinkage-compare": "SES vs uniform shrinkage vs QMC on shared frequencies",
    "stein-sim": "Monte Carlo risk of uniform vs shrunk kernel estimates",
}


def _number(tok):
    tok = tok.strip()
    if "^" in tok:
        base, exp = tok.split("^", 1)
        return float(base) ** float(exp)
    return float(tok)


def float_list(text):
    """Comma-separated numbers; ``a^b`` powers are accepted (``2^-8,2^0``)."""
    return tuple(_number(t) for t in text.split(",") if t.strip())


def int_list(text):
    """Comma-separated integers; ``a-b`` expands to an inclusive range."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "-" in tok:
            lo, hi = tok.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(tok))
    return tuple(out)


def synthetic_shape(text):
    n, d = (int(v) for v in text.split(","))
    return n, d


def sigma_arg(text):
    return text if text in ("median", "grid") else _number(text)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--data", metavar="PATH", help="sparse text dataset")
    src.add_argument("--synthetic", type=synthetic_shape, metavar="n,d",
                     help="standard normal features with a linear-plus-sine target")
    common.add_argument("--task", choices=("regression", "binary"))
    common.add_argument("--positive-class", type=float,
                        help="binarise labels: this label -> +1, all others -> -1")
    common.add_argument("--max-rows", type=int, help="subsample the dataset to this many rows")
    common.add_argument("--data-seed", type=int, default=0)
    common.add_argument("--method",
                        help="comma list of mc, qmc, bq, ses, ses-uniform "
                             "(default: ses for weights, qmc otherwise)")
    common.add_argument("--M", type=int_list, default=(64,), help="comma list of feature counts")
    common.add_argument("--sigma", type=sigma_arg, default="median",
                        help="bandwidth value, 'median' or 'grid'")
    common.add_argument("--seeds", type=int_list, default=(0,), help="e.g. 0-9 or 1,2,3")
    common.add_argument("--pairs-train", type=int)
    common.add_argument("--pairs-val", type=int)
    common.add_argument("--sketch-r", type=int)
    common.add_argument("--r-grid", type=int_list, default=())
    common.add_argument("--lambda-grid", type=float_list, default=experiments.LAMBDA_GRID)
    common.add_argument("--sigma-gp-grid", type=float_list, default=experiments.SIGMA_GP_GRID)
    common.add_argument("--reg-grid", type=float_list, default=experiments.REGULARIZATION_GRID,
                        help="ridge lambda / SVM C candidates for cross-validation")
    common.add_argument("--eval-rows", type=int, default=2000)
    common.add_argument("--train-fraction", type=float, default=0.8)
    common.add_argument("--folds", type=int, default=5)
    common.add_argument("--trials", type=int, default=100_000)
    common.add_argument("--alpha", type=float, help="stein-sim mixing weight (default: plug-in)")
    common.add_argument("--mu", type=float, default=0.0)
    common.add_argument("--dim", type=int, default=5, help="stein-sim input dimension")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--json", action="store_true", help="JSON lines instead of CSV")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--timing", action="store_true",
                        help="fill wall_time_s (makes output run-dependent)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="sesrff-bench",
        description="Random Fourier feature weighting experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def spec_from_args(args):
    method = args.method or ("ses" if args.command == "weights" else "qmc")
    methods = tuple(m.strip().lower() for m in method.split(",") if m.strip())
    if args.command in ("approx", "train", "weights") and not (args.data or args.synthetic):
        raise ValueError("one of --data or --synthetic is required")
    return experiments.ExperimentSpec(
        data_path=args.data,
        synthetic=args.synthetic,
        task=args.task,
        positive_class=args.positive_class,
        max_rows=args.max_rows,
        data_seed=args.data_seed,
        methods=methods,
        Ms=tuple(args.M),
        sigma=args.sigma,
        seeds=tuple(args.seeds),
        pairs_train=args.pairs_train,
        pairs_val=args.pairs_val,
        sketch_r=args.sketch_r,
        r_grid=tuple(args.r_grid),
        lambda_grid=tuple(args.lambda_grid),
        sigma_gp_grid=tuple(args.sigma_gp_grid),
        reg_grid=tuple(args.reg_grid),
        eval_rows=args.eval_rows,
        train_fraction=args.train_fraction,
        folds=args.folds,
        trials=args.trials,
        alpha=args.alpha,
        mu=args.mu,
        dim=args.dim,
        timing=args.timing,
        workers=args.workers,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        spec = spec_from_args(args)
        log.info("running %s with %d cell(s)", args.command,
                 len(experiments.cells(args.command, spec)))
        records = experiments.run(args.command, spec)
        text = format_records(records, experiments.FIELDS[args.command], args.json)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (SESError, ValueError, OSError, IndexError) as exc:
        print(f"sesrff-bench {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
