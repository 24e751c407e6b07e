"""Figure CLI:

    anich-plot errors <run-dir> <run-dir> [...] -o out.png
    anich-plot massenergy <run-dir> [...] -o out.png
    anich-plot filmstrip <run-dir> -o out.png

Consumes exactly the run-directory formats the solver CLI writes.
"""

from __future__ import annotations

import argparse
import sys

from .io import FormatError
from .plots import PLOT_KINDS


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="anich-plot", description="render figures from solver run directories")
    parser.add_argument("kind", choices=sorted(PLOT_KINDS))
    parser.add_argument("run_dirs", nargs="+", metavar="run-dir")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        kwargs = {} if args.title is None else {"title": args.title}
        PLOT_KINDS[args.kind](args.run_dirs, args.output, **kwargs)
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
