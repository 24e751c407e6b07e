"""Command-line entry point.

    anich run <config-or-preset>     execute one simulation
    anich sweep <config> [...]       run several configs across processes
    anich presets list               show shipped experiment presets
    anich verify                     run the fast invariant suite

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
The environment variable ANICH_OUTPUT_ROOT overrides the output root.
"""

from __future__ import annotations

import argparse
import glob
import sys

from .config import PRESETS, resolve_config
from .errors import AnichError, ConfigError
from .runner import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, run, sweep
from .verify import run_verification


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anich",
        description="Energy-stable simulator for the anisotropic Cahn-Hilliard equation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one simulation")
    p_run.add_argument("config", help="config file path or preset name")
    p_run.add_argument("-o", "--output-root", default=None,
                       help="directory that output.dir is resolved against")

    p_sweep = sub.add_parser("sweep", help="run several configs in parallel")
    p_sweep.add_argument("configs", nargs="+",
                         help="config paths, globs, or preset names")
    p_sweep.add_argument("-o", "--output-root", default=None)
    p_sweep.add_argument("-j", "--jobs", type=int, default=None)

    p_presets = sub.add_parser("presets", help="preset utilities")
    p_presets.add_argument("action", choices=["list"])

    sub.add_parser("verify", help="run the fast invariant suite")
    return parser


def _expand(specs) -> list[str]:
    out = []
    for spec in specs:
        matches = sorted(glob.glob(spec))
        out.extend(matches if matches else [spec])
    return out


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return run(resolve_config(args.config), output_root=args.output_root)
        if args.command == "sweep":
            return sweep(_expand(args.configs), output_root=args.output_root,
                         max_workers=args.jobs)
        if args.command == "presets":
            for name in sorted(PRESETS):
                print(name)
            return EXIT_OK
        if args.command == "verify":
            return EXIT_OK if run_verification() else EXIT_NUMERICAL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AnichError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
