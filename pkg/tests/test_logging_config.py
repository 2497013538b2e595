import io
import json
import logging

from app.logging_config import configure_logging


def test_records_are_json_with_extras():
    stream = io.StringIO()
    configure_logging("INFO", stream=stream)

    logging.getLogger("app.test").info("check.started", extra={"check": "finality", "seed": 2})

    record = json.loads(stream.getvalue().strip())
    assert record["severity"] == "INFO"
    assert record["message"] == "check.started"
    assert record["logger"] == "app.test"
    assert record["check"] == "finality"
    assert record["seed"] == 2
    assert record["time"].endswith("Z")


def test_level_filters_and_exceptions_are_formatted():
    stream = io.StringIO()
    configure_logging("WARNING", stream=stream)
    logger = logging.getLogger("app.test")

    logger.info("hidden")
    try:
        raise ValueError("bad")
    except ValueError:
        logger.exception("check.failed")

    lines = stream.getvalue().strip().splitlines()
    assert len(lines) == 1
    record = json.loads(lines[0])
    assert record["severity"] == "ERROR"
    assert "ValueError: bad" in record["exc_info"]


def test_records_default_to_stderr(capsys):
    configure_logging("INFO")

    logging.getLogger("app.test").info("run.started")

    captured = capsys.readouterr()
    assert captured.out == ""
    assert json.loads(captured.err.strip())["message"] == "run.started"
