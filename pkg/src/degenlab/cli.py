"""Command-line entry point: one subcommand per scenario.

Each subcommand reads a ``key = value`` configuration file, runs the
scenario, writes ``report.json`` plus CSV artifacts into the output
directory, and exits 0 exactly when every assertion in the report passed.
Failed metrics are named on stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .scenarios import SCENARIO_RUNNERS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degenlab",
        description=(
            "Verification laboratory for a boundary-degenerate fourth-order "
            "parabolic problem on a half-space strip"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SCENARIO_RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", required=True, help="path to the configuration file")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    if cfg.scenario != args.command:
        print(
            f"error: config declares scenario {cfg.scenario!r}, "
            f"but subcommand is {args.command!r}",
            file=sys.stderr,
        )
        return 2
    out_dir = Path(args.out) if args.out else Path(cfg.out_dir)
    runner = SCENARIO_RUNNERS[args.command]
    result = runner(cfg, out_dir)
    for name in sorted(result.metrics):
        entry = result.metrics[name]
        if not entry["pass"]:
            print(f"FAIL metric {name}: value={entry['value']} bound={entry['bound']}", file=sys.stderr)
    print(f"{args.command}: {result.status} ({result.duration:.2f} s) -> {result.report_path}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
