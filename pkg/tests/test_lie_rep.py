from dataclasses import replace
from fractions import Fraction

import pytest

from app.errors import GuardExceeded
from app.gsets import trivial_gset
from app.lie_rep import (
    ClassRow,
    TreeModuleReport,
    LieBasisElement,
    LieModule,
    bracket,
    is_multiplicative,
    is_real_character,
    lie_character,
    lie_module,
    lie_trace,
    sign_character,
    vanishes_off_uniform_types,
    verify_tree_homology_module,
)
from app.partitions import isovariant_gset
from app.perm_groups import Perm, cyclic_group, symmetric_group, trivial_group, trivial_subgroup


def _cycle_type_perm(n, lengths):
    cycles, start = [], 0
    for length in lengths:
        cycles.append(tuple(range(start, start + length)))
        start += length
    return Perm.from_cycles(n, cycles)


def test_bracket_is_commutator():
    assert bracket({(0,): 1}, {(1,): 1}) == {(0, 1): 1, (1, 0): -1}
    assert bracket({(0,): 1}, {(0,): 1}) == {}


def test_basis_elements():
    element = LieBasisElement(3, (0, 1))

    assert element.format() == "[x3, x1, x2]"
    assert element.expansion[(2, 0, 1)] == 1
    assert sum(1 for word in element.expansion if word[0] == 2) == 1


def test_dimensions():
    assert [lie_module(n).dimension for n in (2, 3, 4, 5)] == [1, 2, 6, 24]


@pytest.mark.parametrize(
    "n, lengths, expected",
    [
        (3, (1, 1, 1), 2),
        (3, (2, 1), 0),
        (3, (3,), -1),
        (4, (1, 1, 1, 1), 6),
        (4, (2, 2), -2),
        (4, (2, 1, 1), 0),
        (4, (4,), 0),
        (5, (5,), -1),
    ],
)
def test_known_character_values(n, lengths, expected):
    assert lie_trace(_cycle_type_perm(n, lengths)) == expected


def test_projection_trace_agrees_with_solved_trace():
    module = lie_module(4)

    for sigma in symmetric_group(4).elements:
        assert module.projection_trace(sigma) == module.trace(sigma)


def test_character_properties():
    chi = lie_character(4)

    assert chi.degree == 1
    assert chi.is_class_function()
    assert is_real_character(chi)
    assert vanishes_off_uniform_types(4)
    assert vanishes_off_uniform_types(5)


def test_sign_character_is_multiplicative():
    A = trivial_gset(trivial_group(), 4)

    assert is_multiplicative(sign_character(A))


def test_lie_guard():
    with pytest.raises(GuardExceeded):
        LieModule(6, guard=5)
    with pytest.raises(ValueError):
        LieModule(1)


def test_tree_homology_module_for_points():
    report = verify_tree_homology_module(trivial_gset(trivial_group(), 4))

    assert report.passed
    assert report.betti == {1: 6}
    assert report.as_payload()["classes"][0]["sign_times_lie"] == 6


def test_tree_homology_module_for_free_c2():
    G = cyclic_group(2)
    report = verify_tree_homology_module(isovariant_gset(G, trivial_subgroup(G), 2))

    assert report.passed
    assert {row.homology for row in report.rows} == {6, -2}


def test_tree_module_report_needs_a_real_character():
    row = ClassRow("()", 1, Fraction(2), Fraction(1), Fraction(2))
    report = TreeModuleReport(size=3, degree=0, betti={0: 2}, torsion={}, rows=(row,))

    assert report.passed
    assert not replace(report, real=False).passed
    assert replace(report, real=False).as_payload()["character_is_real"] is False
