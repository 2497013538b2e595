from __future__ import annotations

import logging
import re
from typing import Dict, List, Optional, Tuple

from app.config import GUARD_KEYS
from app.constants import CHECK_NAMES
from app.errors import ScenarioParseError
from app.gsets import GSet, gset_from_terms, orbit_prefix
from app.models import Scenario
from app.perm_groups import (
    Group,
    Subgroup,
    generate_group,
    parse_cycles,
    subgroup_generated,
    trivial_group,
    trivial_subgroup,
    whole_group,
)

logger = logging.getLogger(__name__)

KNOWN_KEYS = ("name", "group", "gset", "checks", "guards")

_ITEM_RE = re.compile(r'\s*([A-Za-z_][A-Za-z0-9_-]*)\s*=\s*"([^"]*)"\s*')


def _split_items(text: str) -> List[Tuple[str, str, int, int]]:
    """``key="value"`` items separated by ``;`` or newlines; ``#`` starts a comment."""
    items = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw_line)
        position = 0
        while position < len(line):
            if line[position] in " \t;":
                position += 1
                continue
            match = _ITEM_RE.match(line, position)
            if not match:
                raise ScenarioParseError(
                    f'Expected key="value" near {line[position:].strip()!r}',
                    line=line_no,
                    column=position + 1,
                )
            value_column = match.start(2) + 1
            items.append((match.group(1).lower(), match.group(2), line_no, value_column))
            position = match.end()
            if position < len(line) and line[position] != ";":
                raise ScenarioParseError(
                    "Expected ';' between items", line=line_no, column=position + 1
                )
    return items


def _strip_comment(line: str) -> str:
    in_quotes = False
    for k, ch in enumerate(line):
        if ch == '"':
            in_quotes = not in_quotes
        elif ch == "#" and not in_quotes:
            return line[:k]
    return line


def parse_group(spec: str) -> Group:
    if not spec.strip():
        return trivial_group()
    gens, degree = parse_cycles(spec)
    return generate_group(gens, degree)


def _resolve_subgroup(G: Group, label: str) -> Subgroup:
    if label == "e":
        return trivial_subgroup(G)
    if label == "G":
        return whole_group(G)
    if not label.startswith("("):
        raise ScenarioParseError(f"Unknown subgroup label {label!r}")
    gens, _ = parse_cycles(label, degree=G.degree)
    for perm in gens:
        if not G.contains(perm):
            raise ScenarioParseError(f"{perm} is not an element of the group")
    return subgroup_generated(G, gens)


def parse_gset(G: Group, spec: str) -> GSet:
    """Orbit sums such as ``"G/e + G/(1 3)(2 4) + 2"``.

    Integers add fixed points, ``G/H`` adds a coset orbit; a parenthesised label lists
    generators of H separated by ``;``.
    """
    if not spec.strip():
        raise ScenarioParseError("The G-set needs at least one term")
    terms: List[Tuple[str, Optional[Subgroup], int]] = []
    offset = 0
    orbit_count = 0
    for chunk in spec.split("+"):
        term = chunk.strip()
        column = offset + (len(chunk) - len(chunk.lstrip())) + 1
        offset += len(chunk) + 1
        if not term:
            raise ScenarioParseError("Empty orbit term", column=column)
        try:
            if term.isdigit():
                count = int(term)
                if count == 0:
                    continue
                terms.append(("p", None, count))
                continue
            if not term.startswith("G/"):
                raise ScenarioParseError(f"Expected an integer or G/H, got {term!r}")
            label = term[2:]
        except ScenarioParseError as exc:
            raise exc.shifted(line=1, column_offset=column - 1) from None
        try:
            H = _resolve_subgroup(G, label.strip())
        except ScenarioParseError as exc:
            lead = len(label) - len(label.lstrip())
            raise exc.shifted(line=1, column_offset=column + 1 + lead) from None
        terms.append((orbit_prefix(orbit_count), H, 1))
        orbit_count += 1
    A = gset_from_terms(G, terms)
    if A.size == 0:
        raise ScenarioParseError("The G-set is empty")
    return A


def parse_checks(spec: str) -> List[str]:
    if not spec.strip() or spec.strip() == "all":
        return list(CHECK_NAMES)
    names = []
    for raw in spec.split(","):
        name = raw.strip().lower()
        if name not in CHECK_NAMES:
            raise ScenarioParseError(
                f"Unknown check {name!r}; expected one of {', '.join(CHECK_NAMES)}"
            )
        if name not in names:
            names.append(name)
    return [c for c in CHECK_NAMES if c in names]


def parse_guard_overrides(spec: str) -> Dict[str, int]:
    guards: Dict[str, int] = {}
    for raw in spec.split(","):
        if not raw.strip():
            continue
        key, sep, value = raw.partition("=")
        name = key.strip().lower().replace("-", "_")
        if not sep or name not in GUARD_KEYS:
            raise ScenarioParseError(f"Unknown guard override {raw.strip()!r}")
        if not value.strip().isdigit():
            raise ScenarioParseError(f"Guard {name!r} needs a non-negative integer")
        guards[name] = int(value)
    return guards


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    values: Dict[str, Tuple[str, int, int]] = {}
    for key, value, line, column in _split_items(text):
        if key not in KNOWN_KEYS:
            raise ScenarioParseError(f"Unknown key {key!r}", line=line, column=column)
        if key in values:
            raise ScenarioParseError(f"Duplicate key {key!r}", line=line, column=column)
        values[key] = (value, line, column)
    if "gset" not in values:
        raise ScenarioParseError("Missing gset item")

    def parsed(key: str, parser, default: str = ""):
        value, line, column = values.get(key, (default, 1, 1))
        try:
            return parser(value)
        except ScenarioParseError as exc:
            if key in values:
                raise exc.shifted(line=line, column_offset=column - 1) from None
            raise

    group = parsed("group", parse_group)
    gset = parsed("gset", lambda spec: parse_gset(group, spec))
    checks = parsed("checks", parse_checks)
    guards = parsed("guards", parse_guard_overrides)
    scenario = Scenario(
        group_spec=values.get("group", ("", 1, 1))[0],
        gset_spec=values["gset"][0],
        group=group,
        gset=gset,
        checks=checks,
        guards=guards,
        name=values.get("name", (name, 1, 1))[0],
        text=text,
    )
    logger.info(
        "scenario.parsed",
        extra={
            "scenario": scenario.name,
            "group_order": group.order,
            "gset_size": gset.size,
            "checks": checks,
        },
    )
    return scenario
