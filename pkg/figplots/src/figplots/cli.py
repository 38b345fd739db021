"""Command-line entry point.

    kpo-plot --figure <name> --in DIR --out DIR [--format svg|png]
    kpo-plot --list

Exit codes: 0 success, 2 usage/schema error.
"""

from __future__ import annotations

import argparse
import sys

from .csvio import SchemaError
from .plots import FIGURES, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="kpo-plot",
                                     description="render KPO study figures from CSV datasets")
    parser.add_argument("--figure", help="figure name (see --list)")
    parser.add_argument("--in", dest="in_dir", help="directory holding the CSV dataset(s)")
    parser.add_argument("--out", dest="out_dir", help="directory for the rendered image(s)")
    parser.add_argument("--format", choices=("svg", "png"), default="svg",
                        help="vector by default; png as the raster fallback")
    parser.add_argument("--list", action="store_true", help="list known figures")
    args = parser.parse_args(argv)

    if args.list:
        for name in sorted(FIGURES):
            print(name)
        return 0
    if not (args.figure and args.in_dir and args.out_dir):
        parser.print_usage(sys.stderr)
        return 2
    try:
        for path in render(args.figure, args.in_dir, args.out_dir, args.format):
            print(path)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
