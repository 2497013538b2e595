import math
import random
from fractions import Fraction

import pytest

from app.errors import ScenarioParseError
from app.gsets import trivial_gset
from app.partitions import Partition, build_partition_poset, isovariant_gset
from app.perm_groups import (
    Perm,
    all_subgroups,
    cyclic_group,
    trivial_group,
    trivial_subgroup,
    whole_group,
)
from app.scenario import parse_scenario
from app.simplicial_homology import order_complex, reduced_homology
from app.trees import (
    F_inverse,
    F_map,
    LayeredTree,
    MeasuredTree,
    ReducedTree,
    build_tree_poset,
    build_tree_space,
    enumerate_reduced_trees,
    layered_to_tree,
    measured_tree_partition_point,
    parse_measured_tree_literal,
    parse_tree_literal,
    random_measured_tree,
    verify_tree_fixed_points,
    verify_tree_space_fixed_points,
)

NAMES = ("a", "b", "c", "d")


def _points(n):
    return trivial_gset(trivial_group(), n)


def _free_c2_on_four():
    G = cyclic_group(2)
    return isovariant_gset(G, trivial_subgroup(G), 2)


def test_tree_counts():
    assert len(enumerate_reduced_trees(_points(3))) == 3
    assert len(enumerate_reduced_trees(_points(4))) == 25
    assert enumerate_reduced_trees(_points(2)) == []


@pytest.mark.parametrize("n", [3, 4, 5])
def test_tree_space_poset_and_partition_betti_agree(n):
    A = _points(n)
    expected = {n - 3: math.factorial(n - 1)}

    assert reduced_homology(build_tree_space(A)).nonzero() == expected
    assert reduced_homology(order_complex(build_tree_poset(A))).nonzero() == expected
    assert reduced_homology(order_complex(build_partition_poset(A))).nonzero() == expected


def test_reduced_tree_rejects_overlapping_clades():
    with pytest.raises(ValueError):
        ReducedTree.from_clades(4, [[0, 1], [1, 2]])


def test_tree_literal_round_trip():
    tree = parse_tree_literal("((a b) c d)", NAMES)

    assert tree.clades == frozenset({frozenset({0, 1})})
    assert tree.format(NAMES) == "((a b) c d)"
    assert [t.format(NAMES) for t in tree.faces()] == []


@pytest.mark.parametrize(
    "literal, message",
    [
        ("((a b) c", "Unbalanced"),
        ("((a) b c d)", "at least two children"),
        ("((a b) c e d)", "Unknown leaf"),
        ("((a b) c)", "missing"),
        ("((a b) a c d)", "twice"),
    ],
)
def test_tree_literal_errors(literal, message):
    with pytest.raises(ScenarioParseError) as excinfo:
        parse_tree_literal(literal, NAMES)

    assert message in excinfo.value.reason


def test_relabel_and_faces():
    tree = parse_tree_literal("(((a b) c) d)", NAMES)
    swapped = tree.relabel(Perm.from_cycles(4, [(0, 3)]))

    assert swapped.format(NAMES) == "(a ((b d) c))"
    assert [face.format(NAMES) for face in tree.faces()] == ["((a b c) d)", "((a b) c d)"]


def test_measured_tree_chain_round_trip():
    M = parse_measured_tree_literal("(((a b)@1/2 c)@1 d)", NAMES)
    chain, coords = F_map(M)

    assert [t.format(NAMES) for t in chain] == ["(((a b) c) d)", "((a b c) d)"]
    assert coords == [Fraction(1, 2), Fraction(1, 2)]
    assert F_inverse(chain, coords) == M
    assert M.format(NAMES) == "(((a b)@1/2 c)@1 d)"


def test_six_leaf_measured_tree_coordinates():
    names = ("a", "b", "c", "d", "e", "f")
    M = parse_measured_tree_literal("((a b)@1/2 ((c d)@1/2 (e f)@2/3)@1)", names)
    chain, coords = F_map(M)

    assert coords == [Fraction(1, 2), Fraction(1, 6), Fraction(1, 3)]
    assert [len(t.clades) for t in chain] == [4, 2, 1]
    assert F_inverse(chain, coords) == M


def test_measured_tree_partition_point():
    M = parse_measured_tree_literal("(((a b)@1/2 c)@1 d)", NAMES)
    chain, coords = measured_tree_partition_point(M)

    assert chain == [
        Partition.from_blocks([[0, 1], [2], [3]]),
        Partition.from_blocks([[0, 1, 2], [3]]),
    ]
    assert coords == [Fraction(1, 3), Fraction(2, 3)]


def test_measured_tree_needs_unit_edge():
    tree = parse_tree_literal("((a b) c d)", NAMES)

    with pytest.raises(ValueError):
        MeasuredTree.build(tree, {frozenset({0, 1}): Fraction(1, 2)})


@pytest.mark.parametrize("n", [3, 4, 5])
def test_random_measured_trees_invert(n):
    rng = random.Random(7 + n)
    trees = enumerate_reduced_trees(_points(n))

    for _ in range(100):
        M = random_measured_tree(trees, rng)
        assert F_inverse(*F_map(M)) == M


def test_layered_tree_collapse():
    layered = LayeredTree(
        (
            Partition.from_blocks([[0, 1], [2], [3]]),
            Partition.from_blocks([[0, 1, 2], [3]]),
        )
    )

    assert layered.is_elementary()
    assert layered_to_tree(layered) == ReducedTree.from_clades(4, [[0, 1], [0, 1, 2]])
    assert layered_to_tree(layered.face(0)) == ReducedTree.from_clades(4, [[0, 1, 2]])


def test_layered_tree_needs_strict_chain():
    p = Partition.from_blocks([[0, 1], [2], [3]])

    with pytest.raises(ValueError):
        LayeredTree((p, p))


def test_fixed_trees_match_equivariant_trees():
    A = _free_c2_on_four()
    G = A.group

    assert verify_tree_fixed_points(A, whole_group(G)).holds
    assert verify_tree_space_fixed_points(A, whole_group(G)).matches


def test_fixed_trees_on_c4_orbit_sum():
    A = parse_scenario('group="(1 2 3 4)"; gset="G/e + G/(1 3)(2 4)"').gset

    for H in all_subgroups(A.group):
        assert verify_tree_fixed_points(A, H).holds
