"""Command-line interface: export one ensemble dump or run the resplit protocol."""
import argparse
import sys

from . import datasets
from .build import build_ensemble
from .errors import HarnessError
from .reproduce import format_results, reproduce

EXIT_OK = 0
EXIT_ERROR = 2


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="harness",
        description="Train the ten-regressor zoo and evaluate it through the upcr CLI.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="train the zoo on one split and write CSV dumps")
    p_build.add_argument("--dataset", required=True, choices=datasets.DATASET_NAMES)
    p_build.add_argument("--seed", type=int, required=True, help="resplit seed")
    p_build.add_argument("--n-train", type=int, default=None,
                         help="training rows (default: the dataset's protocol size)")
    p_build.add_argument("--output-dir", default=".")
    p_build.set_defaults(func=cmd_build)

    p_rep = sub.add_parser("reproduce", help="average the zoo comparison over resplits")
    p_rep.add_argument("--datasets", nargs="+", choices=datasets.DATASET_NAMES,
                       default=list(datasets.DEFAULT_SET))
    p_rep.add_argument("--repeats", type=int, default=20)
    p_rep.add_argument("--jobs", type=int, default=1,
                       help="parallel workers over (dataset, repeat)")
    p_rep.add_argument("--out", default="results.csv", help="results CSV path")
    p_rep.set_defaults(func=cmd_reproduce)
    return parser


def cmd_build(args):
    paths = build_ensemble(args.dataset, args.seed, n_train=args.n_train,
                           output_dir=args.output_dir)
    print("wrote " + ", ".join(sorted(paths.values())))
    return EXIT_OK


def cmd_reproduce(args):
    rows = reproduce(names=args.datasets, repeats=args.repeats,
                     jobs=args.jobs, out_path=args.out)
    print(format_results(rows))
    print(f"wrote {args.out}")
    return EXIT_OK


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except HarnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entrypoint():
    sys.exit(main())
