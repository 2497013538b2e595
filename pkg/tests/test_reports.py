import json

from app.constants import VERDICT_FAIL, VERDICT_PASS, VERDICT_SKIPPED
from app.models import CheckResult, Report
from app.reports import render_json, render_markdown, render_summary, write_report
from app.scenario import parse_scenario


def _report(verdict=VERDICT_PASS):
    scenario = parse_scenario('name="demo"; group="(1 2)"; gset="G/e + 1"')
    results = [
        CheckResult(
            name="partition-homology",
            verdict=verdict,
            anchor="homology | anchor",
            payload={"homology": {"reduced_betti": {"0": 2}}},
            seconds=0.12345,
        ),
        CheckResult(
            name="lie-character",
            verdict=VERDICT_SKIPPED,
            anchor="lie anchor",
            reason="guard exceeded",
            seconds=0.5,
        ),
    ]
    return Report(scenario=scenario, results=results, seed=3)


def test_json_report_is_sorted_and_untimed_by_default():
    text = render_json(_report())
    payload = json.loads(text)

    assert payload["seed"] == 3
    assert payload["scenario"]["name"] == "demo"
    assert payload["summary"]["PASS"] == 1
    assert payload["summary"]["SKIPPED"] == 1
    assert "seconds" not in payload["checks"][0]
    assert text == json.dumps(payload, sort_keys=True, indent=2) + "\n"


def test_json_report_is_deterministic():
    assert render_json(_report()) == render_json(_report())


def test_timing_is_opt_in():
    payload = json.loads(render_json(_report(), timing=True))

    assert payload["checks"][0]["seconds"] == 0.123


def test_markdown_report():
    text = render_markdown(_report(), timing=True)

    assert text.startswith("# Verification report: demo")
    assert "| partition-homology | PASS | homology \\| anchor |  | 0.123 |" in text
    assert "## partition-homology" in text
    assert "## lie-character" not in text


def test_summary_lines():
    assert render_summary(_report()).splitlines()[-1] == "OK"
    failing = render_summary(_report(VERDICT_FAIL)).splitlines()
    assert failing[0].startswith("FAIL")
    assert failing[-1] == "FAILED"


def test_write_report_creates_directories(tmp_path):
    target = tmp_path / "out" / "report.json"
    write_report(target, "{}\n")

    assert target.read_text(encoding="utf-8") == "{}\n"
