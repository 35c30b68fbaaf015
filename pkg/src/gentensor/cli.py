"""Command-line front end.

    gentensor run <config.json> --out <dir> [--quad-nodes N] [--seed S]
    gentensor list-catalogs [--no-builtin]

Exit codes for ``run``: 0 all declared checks pass, 1 numeric failure (report
still written), 2 config parse error, 3 catalog resolution error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .catalogs import list_catalogs
from .errors import ConfigError, GentensorError, UnknownNameError
from .experiments import load_config, run_experiment, write_artifacts

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_CONFIG = 2
EXIT_CATALOG = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gentensor",
        description="run generalized-tensor-field experiments from JSON configs")
    parser.add_argument("--version", action="version", version=f"gentensor {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one experiment config")
    run_p.add_argument("config", help="path to the JSON experiment config")
    run_p.add_argument("--out", required=True, help="output directory for artifacts")
    run_p.add_argument("--quad-nodes", type=int, default=None,
                       help="override the per-axis quadrature node count")
    run_p.add_argument("--seed", type=int, default=None,
                       help="seed for random-test-tuple experiments (echoed in the report)")

    list_p = sub.add_parser("list-catalogs", help="print all registered catalog entries")
    list_p.add_argument("--no-builtin", action="store_true",
                        help="print section headers only (empty catalogs)")
    return parser


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report, rows = run_experiment(config, args.quad_nodes, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnknownNameError as exc:
        print(f"catalog error: {exc}", file=sys.stderr)
        return EXIT_CATALOG
    except GentensorError as exc:
        # numeric failure during evaluation: write a failure report
        report = {
            "experiment": config.get("experiment", "unknown"),
            "config": config,
            "results": {"error": str(exc)},
            "checks": [{"name": "completed", "value": str(exc), "passed": False}],
            "passed": False,
            "metadata": {"package_version": __version__, "seed": -1, "quad_nodes": -1,
                         "python": "", "numpy": "", "platform": ""},
        }
        Path(args.out).mkdir(parents=True, exist_ok=True)
        import json
        (Path(args.out) / "report.json").write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n")
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    write_artifacts(report, rows, args.out)
    summary_path = Path(args.out) / "summary.txt"
    sys.stdout.write(summary_path.read_text())
    return EXIT_OK if report["passed"] else EXIT_NUMERIC


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "list-catalogs":
        sys.stdout.write(list_catalogs(include_builtin=not args.no_builtin))
        return EXIT_OK
    return EXIT_CONFIG  # pragma: no cover


if __name__ == "__main__":
    raise SystemExit(main())
