import pytest

from app.constants import CHECK_NAMES
from app.errors import ScenarioParseError
from app.scenario import parse_checks, parse_gset, parse_group, parse_scenario


def test_parse_subgroup_scenario():
    scenario = parse_scenario('group="(1 2)"; gset="G/e + 2"', name="c2-in-s4")

    assert scenario.name == "c2-in-s4"
    assert scenario.group.order == 2
    assert scenario.gset.names == ("a0", "a1", "p1", "p2")
    assert scenario.checks == list(CHECK_NAMES)
    assert scenario.echo()["orbits"] == "G/e + G/G + G/G"


def test_multiline_items_with_comments():
    text = (
        "# cyclic group of order four\n"
        'name="c4"\n'
        'group="(1 2 3 4)"  # generator\n'
        'gset="G/e + G/(1 3)(2 4)"\n'
        'checks="lie-character, finality"\n'
        'guards="zigzag_points=6"\n'
    )
    scenario = parse_scenario(text)

    assert scenario.name == "c4"
    assert scenario.gset.size == 6
    assert scenario.gset.names[4:] == ("b0", "b1")
    assert scenario.checks == ["finality", "lie-character"]
    assert scenario.guards == {"zigzag_points": 6}


def test_trivial_group_by_default():
    scenario = parse_scenario('gset="4"')

    assert scenario.group.order == 1
    assert scenario.gset.names == ("p1", "p2", "p3", "p4")


@pytest.mark.parametrize(
    "text, line, column, message",
    [
        ('group="(1 2)"\ncolour="red"', 2, 9, "Unknown key"),
        ('gset="3"; gset="4"', 1, 17, "Duplicate key"),
        ('group="(1 2 3 4)"\ngset="G/(1 5)"', 2, 9, "exceeds degree"),
        ('group="(1 2 3 4)"\ngset="G/(1 3)"', 2, 9, "not an element"),
        ('gset="2 + G/x"', 1, 13, "Unknown subgroup"),
        ('gset="3" checks="all"', 1, 10, "Expected ';'"),
        ('gset="3"; checks="bogus"', 1, 19, "Unknown check"),
    ],
)
def test_parse_errors_carry_positions(text, line, column, message):
    with pytest.raises(ScenarioParseError) as excinfo:
        parse_scenario(text)

    assert (excinfo.value.line, excinfo.value.column) == (line, column)
    assert message in excinfo.value.reason


def test_missing_gset():
    with pytest.raises(ScenarioParseError) as excinfo:
        parse_scenario('group="(1 2)"')

    assert "Missing gset" in excinfo.value.reason


def test_hash_inside_quotes_is_kept():
    with pytest.raises(ScenarioParseError) as excinfo:
        parse_scenario('gset="3#4"')

    assert "3#4" in excinfo.value.reason


def test_parse_group_and_gset_helpers():
    G = parse_group("(1 2);(1 2 3)")

    assert G.order == 6
    assert parse_gset(G, "G/(1 2) + 1").size == 4
    assert parse_checks("") == list(CHECK_NAMES)
    with pytest.raises(ScenarioParseError):
        parse_gset(G, "0")
