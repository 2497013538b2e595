from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List

from app.constants import VERDICT_FAIL, VERDICT_PASS, VERDICT_REPORT_ONLY, VERDICT_SKIPPED
from app.models import Report
from app.trace import build_run_id

logger = logging.getLogger(__name__)


def report_payload(report: Report, timing: bool = False) -> Dict[str, Any]:
    counts = {
        verdict: sum(1 for r in report.results if r.verdict == verdict)
        for verdict in (VERDICT_PASS, VERDICT_FAIL, VERDICT_REPORT_ONLY, VERDICT_SKIPPED)
    }
    return {
        "run_id": build_run_id(report.scenario.text, report.seed),
        "seed": report.seed,
        "scenario": report.scenario.echo(),
        "checks": [r.as_payload(timing=timing) for r in report.results],
        "summary": counts,
        "passed": not report.failed,
    }


def render_json(report: Report, timing: bool = False) -> str:
    return json.dumps(report_payload(report, timing), sort_keys=True, indent=2) + "\n"


def _cell(value: Any) -> str:
    return str(value).replace("|", "\\|").replace("\n", " ")


def render_markdown(report: Report, timing: bool = False) -> str:
    payload = report_payload(report, timing)
    scenario = payload["scenario"]
    lines: List[str] = [
        f"# Verification report: {scenario['name']}",
        "",
        f"- group: `{scenario['group'] or 'trivial'}` (order {scenario['group_order']})",
        f"- G-set: `{scenario['gset']}` ({scenario['gset_size']} points: {scenario['orbits']})",
        f"- seed: {payload['seed']}",
        f"- run id: `{payload['run_id']}`",
        "",
        "| check | verdict | anchor | note |" + (" seconds |" if timing else ""),
        "|---|---|---|---|" + ("---|" if timing else ""),
    ]
    for entry in payload["checks"]:
        row = (
            f"| {entry['name']} | {entry['verdict']} | {_cell(entry['anchor'])} "
            f"| {_cell(entry.get('reason', ''))} |"
        )
        if timing:
            row += f" {entry.get('seconds', '')} |"
        lines.append(row)
    for entry in payload["checks"]:
        if not entry["payload"]:
            continue
        lines.extend(
            [
                "",
                f"## {entry['name']}",
                "",
                "```json",
                json.dumps(entry["payload"], sort_keys=True, indent=2),
                "```",
            ]
        )
    summary = ", ".join(f"{k} {v}" for k, v in payload["summary"].items())
    lines.extend(["", f"Summary: {summary}", ""])
    return "\n".join(lines)


def render_summary(report: Report) -> str:
    width = max((len(r.name) for r in report.results), default=0)
    lines = [
        f"{r.verdict:<12}{r.name:<{width}}" + (f"  ({r.reason})" if r.reason else "")
        for r in report.results
    ]
    lines.append("FAILED" if report.failed else "OK")
    return "\n".join(lines) + "\n"


def write_report(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info("report.written", extra={"path": str(path), "bytes": len(text.encode("utf-8"))})
