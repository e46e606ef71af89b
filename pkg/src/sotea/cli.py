"""Command-line interface.

Subcommands: run, netstats, snapshot, verify. A spec argument is a JSON
(or TOML, Python 3.11+) file path or a bundled preset name (fig8, fig9,
fig10, fig11, table1, fig12). Output directory precedence: --out flag,
SOTEA_OUT environment variable, out_dir in the spec file, ./sotea_out.

Exit codes: 0 success, 1 runtime or verification failure, 2 invalid
spec, 3 I/O failure, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__, harness, verify

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_SPEC = 2
EXIT_IO = 3
EXIT_BUDGET = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sotea",
        description="Evolutionary optimization on self-organizing interaction networks",
    )
    parser.add_argument("--version", action="version", version=f"sotea {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_spec=True):
        if with_spec:
            p.add_argument("spec", help="spec file path or preset name")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="override the spec's master seed")
        p.add_argument("--workers", type=int, help="parallel run workers")

    p_run = sub.add_parser("run", help="execute all sweep runs and write CSVs")
    add_common(p_run)
    p_net = sub.add_parser("netstats", help="topology statistics versus population size")
    add_common(p_net)
    p_snap = sub.add_parser("snapshot", help="export one run's graph at a generation")
    add_common(p_snap)
    p_snap.add_argument("--generation", type=int, required=True)
    sub.add_parser("verify", help="run the fast oracle suite")
    return parser


def _out_dir(args, spec) -> str:
    if args.out:
        return args.out
    env = os.environ.get("SOTEA_OUT")
    if env:
        return env
    if spec is not None and spec.out_dir:
        return spec.out_dir
    return "sotea_out"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return EXIT_OK if verify.run_all() else EXIT_FAILURE
    try:
        spec = harness.resolve_spec_argument(args.spec)
    except harness.SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_SPEC
    if args.seed is not None:
        spec.seed = args.seed
    if args.workers is not None:
        spec.workers = args.workers
    out_dir = _out_dir(args, spec)
    try:
        if args.command == "run":
            manifest = harness.run_experiment(spec, out_dir)
            print(f"wrote {len(manifest['runs'])} runs to {out_dir}")
        elif args.command == "netstats":
            manifest = harness.netstats_experiment(spec, out_dir)
            print(f"wrote netstats for m={[r['m'] for r in manifest['rows']]} to {out_dir}")
        elif args.command == "snapshot":
            manifest = harness.snapshot_experiment(spec, args.generation, out_dir)
            print(f"wrote snapshot at generation {args.generation} to {out_dir}")
    except harness.SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_SPEC
    except harness.BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
