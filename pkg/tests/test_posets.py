import pytest

from app.errors import SearchBudgetExceeded
from app.perm_groups import cyclic_group, whole_group
from app.posets import (
    ActedPoset,
    chain_poset,
    compare_posets,
    enumerate_chains,
    has_conical_contraction,
    has_cone_point,
    poset_isomorphic,
)

SUBSETS = (frozenset(), frozenset({0}), frozenset({1}), frozenset({0, 1}))


def _subset_lattice(with_swap=True):
    if not with_swap:
        return ActedPoset.from_relation(SUBSETS, lambda a, b: a <= b)
    G = cyclic_group(2)
    return ActedPoset.from_relation(
        SUBSETS,
        lambda a, b: a <= b,
        group=G,
        act=lambda g, s: frozenset(G.elements[g](x) for x in s),
    )


def _three_chain():
    return ActedPoset.from_relation(("a", "b", "c"), lambda x, y: x <= y)


def test_subset_lattice_structure():
    P = _subset_lattice()

    assert P.is_partial_order()
    assert P.is_order_preserving_action()
    assert P.is_action_homomorphism()
    assert P.relation_count() == 5
    assert P.ranks == (0, 1, 1, 2)
    assert P.orbits() == [(0,), (1, 2), (3,)]
    assert P.is_connected()


def test_fixed_subposet_of_swap():
    P = _subset_lattice()
    fixed = P.fixed_subposet(whole_group(P.group))

    assert fixed.objects == (frozenset(), frozenset({0, 1}))
    assert fixed.relation_count() == 1


def test_subposet_must_be_invariant():
    P = _subset_lattice()

    with pytest.raises(ValueError):
        P.subposet([0, 1])


def test_action_must_stay_in_poset():
    G = cyclic_group(2)

    with pytest.raises(ValueError):
        ActedPoset.from_relation(
            ("x", "y"), lambda a, b: a == b, group=G, act=lambda g, obj: "z" if g else obj
        )


def test_cone_points():
    P = _subset_lattice()

    assert has_cone_point(P) == 0
    assert has_conical_contraction(P) == 0
    assert has_cone_point(P.subposet([1, 2], keep_action=False)) is None


def test_chains_of_three_chain():
    P = _three_chain()

    assert len(enumerate_chains(P)) == 7
    chains = chain_poset(P)
    assert chains.base is P
    assert chains.objects[-1] == (0, 1, 2)
    # every chain is a face of the top chain
    assert chains.down[chains.size - 1] == frozenset(range(chains.size))


def test_chain_poset_carries_action():
    chains = chain_poset(_subset_lattice())

    assert chains.group.order == 2
    assert chains.is_order_preserving_action()
    assert len(chains.orbits()) == 7


def test_compare_posets_canonical_and_search():
    P = _subset_lattice(with_swap=False)
    renamed = ActedPoset.from_relation(("bottom", "l", "r", "top"), lambda a, b: (
        a == b or a == "bottom" or b == "top"
    ))

    same = compare_posets(P, _subset_lattice(with_swap=False))
    assert same.holds and same.method == "canonical"

    found = compare_posets(P, renamed, render=lambda obj: str(sorted(obj)))
    assert found.holds and found.method == "search"
    assert found.as_payload()["certificate"][0] == ["[]", "bottom"]

    assert not compare_posets(P, _three_chain()).holds


def test_search_budget():
    P = _subset_lattice(with_swap=False)
    Q = ActedPoset.from_relation(("w", "x", "y", "z"), lambda a, b: a == b or a == "w" or b == "z")

    with pytest.raises(SearchBudgetExceeded):
        poset_isomorphic(P, Q, node_cap=1)
