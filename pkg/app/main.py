from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

from app.checks import run_checks
from app.config import GUARD_KEYS, get_config, with_guards
from app.constants import CHECK_NAMES
from app.errors import ScenarioParseError
from app.logging_config import configure_logging
from app.reports import render_json, render_markdown, render_summary, write_report
from app.scenario import parse_scenario

logger = logging.getLogger(__name__)

EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="verify",
        description="Verify equivariant partition and tree complex statements on a scenario.",
    )
    parser.add_argument("scenario", type=Path, help="scenario file")
    parser.add_argument(
        "--check",
        action="append",
        choices=CHECK_NAMES,
        metavar="NAME",
        help="run only this check (repeatable); one of " + ", ".join(CHECK_NAMES),
    )
    parser.add_argument("--json", type=Path, metavar="OUT", help="write the JSON report here")
    parser.add_argument("--md", type=Path, metavar="OUT", help="write the Markdown report here")
    parser.add_argument(
        "--guard",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a size guard; keys: " + ", ".join(GUARD_KEYS),
    )
    parser.add_argument("--seed", type=int, help="seed for sampled checks")
    parser.add_argument("--workers", type=int, help="worker processes for checks")
    parser.add_argument(
        "--timing", action="store_true", help="include per-check seconds in the reports"
    )
    return parser


def _parse_guard_args(values: Sequence[str]) -> dict:
    overrides = {}
    for raw in values:
        key, sep, value = raw.partition("=")
        if not sep:
            raise ValueError(f"Guard override {raw!r} is not KEY=VALUE")
        overrides[key] = value
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = get_config()
    except RuntimeError as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return EXIT_USAGE
    configure_logging(config.log_level)

    try:
        text = args.scenario.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"verify: cannot read {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        scenario = parse_scenario(text, name=args.scenario.stem)
    except ScenarioParseError as exc:
        print(f"{args.scenario}:{exc.line}:{exc.column}: {exc.reason}", file=sys.stderr)
        return EXIT_USAGE

    if args.check:
        scenario.checks = [name for name in CHECK_NAMES if name in args.check]

    try:
        config = with_guards(config, scenario.guards)
        config = with_guards(config, _parse_guard_args(args.guard))
    except ValueError as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.workers is not None:
        if args.workers < 1:
            print("verify: --workers must be at least 1", file=sys.stderr)
            return EXIT_USAGE
        config = replace(config, workers=args.workers)

    report = run_checks(scenario, config)

    if args.json:
        write_report(args.json, render_json(report, timing=args.timing))
    if args.md:
        write_report(args.md, render_markdown(report, timing=args.timing))
    sys.stdout.write(render_summary(report))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
