import json

import pytest

from app.config import get_config
from app.main import main


@pytest.fixture(autouse=True)
def _fresh_config(monkeypatch):
    monkeypatch.setenv("LOG_LEVEL", "WARNING")
    get_config.cache_clear()
    yield
    get_config.cache_clear()


def _scenario(tmp_path, text):
    path = tmp_path / "scenario.txt"
    path.write_text(text, encoding="utf-8")
    return path


def test_runs_selected_checks_and_writes_reports(tmp_path, capsys):
    path = _scenario(tmp_path, 'name="points"\ngset="4"\n')
    json_out = tmp_path / "report.json"
    md_out = tmp_path / "report.md"

    code = main(
        [
            str(path),
            "--check",
            "lie-character",
            "--check",
            "partition-homology",
            "--json",
            str(json_out),
            "--md",
            str(md_out),
            "--seed",
            "5",
        ]
    )

    assert code == 0
    payload = json.loads(json_out.read_text(encoding="utf-8"))
    assert [c["name"] for c in payload["checks"]] == ["partition-homology", "lie-character"]
    assert payload["seed"] == 5
    assert md_out.read_text(encoding="utf-8").startswith("# Verification report: points")
    assert capsys.readouterr().out.splitlines()[-1] == "OK"


def test_parse_errors_exit_two_with_position(tmp_path, capsys):
    path = _scenario(tmp_path, 'group="(1 2)"\ngset="G/q"\n')

    assert main([str(path)]) == 2
    err = capsys.readouterr().err
    assert f"{path}:2:9:" in err
    assert "Unknown subgroup" in err


def test_missing_file_exits_two(tmp_path, capsys):
    assert main([str(tmp_path / "absent.txt")]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_cli_guard_beats_scenario_guard(tmp_path, capsys):
    path = _scenario(
        tmp_path, 'gset="4"; checks="zigzag-betti"; guards="zigzag_points=6"\n'
    )

    assert main([str(path), "--guard", "zigzag_points=3"]) == 0
    assert capsys.readouterr().out.startswith("SKIPPED")


def test_bad_guard_exits_two(tmp_path, capsys):
    path = _scenario(tmp_path, 'gset="4"\n')

    assert main([str(path), "--guard", "nonsense"]) == 2
    assert "KEY=VALUE" in capsys.readouterr().err


def test_failures_exit_one(tmp_path, monkeypatch, capsys):
    from app import checks

    def failing(scenario, config):
        raise ArithmeticError("forced")

    monkeypatch.setitem(checks._CHECKS, "partition-homology", ("anchor", failing))
    path = _scenario(tmp_path, 'gset="4"; checks="partition-homology"\n')

    assert main([str(path)]) == 1
    assert capsys.readouterr().out.splitlines()[-1] == "FAILED"


def test_unknown_check_is_a_usage_error(tmp_path):
    path = _scenario(tmp_path, 'gset="4"\n')

    with pytest.raises(SystemExit) as excinfo:
        main([str(path), "--check", "bogus"])

    assert excinfo.value.code == 2
