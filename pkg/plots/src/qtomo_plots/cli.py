"""Command-line entry points for the figure scripts.

    qtomo-plot runtime --timing timing.csv --out fig_runtime.png
    qtomo-plot mse-compare --manifests run/manifest.json ... --out fig_mse.png
    qtomo-plot acceptance-sweep --manifests t01.json t03.json t07.json --out fig_acc.png

Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

import argparse
import sys

from .figures import plot_mse_boxplots, plot_runtime


def build_parser():
    parser = argparse.ArgumentParser(prog="qtomo-plot",
                                     description="figures from qtomo artifacts")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("runtime", help="log-scale runtime vs qubit count")
    p.add_argument("--timing", required=True, help="timing CSV path")
    p.add_argument("--out", required=True, help="output image (png/svg)")

    p = sub.add_parser("mse-compare", help="per-method MSE/MAEE boxplots")
    p.add_argument("--manifests", nargs="+", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("acceptance-sweep",
                       help="MSE/MAEE boxplots keyed by target acceptance")
    p.add_argument("--manifests", nargs="+", required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        if args.command == "runtime":
            plot_runtime(args.timing, args.out)
        elif args.command == "mse-compare":
            plot_mse_boxplots(args.manifests, args.out, group_by="method")
        else:
            plot_mse_boxplots(args.manifests, args.out, group_by="acceptance")
    except (ValueError, OSError, KeyError) as exc:
        print(f"qtomo-plot: error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
