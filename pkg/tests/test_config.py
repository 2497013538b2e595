import pytest

from app.config import GUARD_KEYS, Config, get_config, with_guards
from app.constants import DEFAULT_PARTITION_GUARD


@pytest.fixture(autouse=True)
def _fresh_config():
    get_config.cache_clear()
    yield
    get_config.cache_clear()


def test_defaults(monkeypatch):
    monkeypatch.delenv("GUARD_PARTITION_POINTS", raising=False)
    monkeypatch.delenv("VERIFY_SEED", raising=False)

    config = get_config()

    assert config.partition_points == DEFAULT_PARTITION_GUARD
    assert config.seed == 0


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("GUARD_ZIGZAG_POINTS", "6")
    monkeypatch.setenv("VERIFY_WORKERS", "3")
    monkeypatch.setenv("LOG_LEVEL", "DEBUG")

    config = get_config()

    assert config.zigzag_points == 6
    assert config.workers == 3
    assert config.log_level == "DEBUG"


def test_invalid_environment_integer(monkeypatch):
    monkeypatch.setenv("GUARD_SIMPLICES", "lots")

    with pytest.raises(RuntimeError):
        get_config()


def test_with_guards_normalizes_keys():
    config = with_guards(Config(), {"Tree-Points": "8", "samples": 3})

    assert config.tree_points == 8
    assert config.samples == 3
    assert "log_level" not in GUARD_KEYS


@pytest.mark.parametrize("overrides", [{"nope": 1}, {"chains": "x"}, {"chains": -1}])
def test_with_guards_rejects_bad_values(overrides):
    with pytest.raises(ValueError):
        with_guards(Config(), overrides)
