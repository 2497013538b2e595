import pytest

from app.errors import GuardExceeded
from app.gsets import coset_gset, disjoint_union, trivial_gset
from app.partitions import (
    Partition,
    build_equivariant_partition_poset,
    build_partition_poset,
    equivariant_partition_homology,
    equivariant_partitions_from_surjections,
    invariant_partitions,
    is_transitive_quotient_of_type,
    isovariant_gset,
    isovariant_wedge_prediction,
    orbit_partition,
    orthogonal_complement,
    set_partitions,
    two_orbit_subposet,
    verify_fixed_point_equivalence,
    weyl_identity_check,
)
from app.perm_groups import (
    Perm,
    cyclic_group,
    generate_group,
    subgroup_generated,
    trivial_group,
    trivial_subgroup,
    whole_group,
)
from app.simplicial_homology import order_complex, reduced_homology


def _points(n):
    return trivial_gset(trivial_group(), n)


def _c2_on_orbit_and_point():
    G = cyclic_group(2)
    return disjoint_union(coset_gset(G, trivial_subgroup(G), "a"), trivial_gset(G, 1, "p"))


def test_partition_lattice_operations():
    p = Partition.from_blocks([[0, 1], [2], [3]])
    q = Partition.from_blocks([[0], [1, 2], [3]])

    assert p.join(q) == Partition.from_blocks([[0, 1, 2], [3]])
    assert p.meet(q).is_discrete()
    assert p.join(q).coarsens(p)
    assert not p.coarsens(q)
    assert p.image(Perm.from_cycles(4, [(1, 2)])) == Partition.from_blocks([[0, 2], [1], [3]])
    assert str(p) == "(1 2)(3)(4)"


def test_from_blocks_rejects_overlap():
    with pytest.raises(ValueError):
        Partition.from_blocks([[0, 1], [1, 2]])


def test_set_partitions_counts():
    assert [len(set_partitions(n)) for n in range(1, 6)] == [1, 2, 5, 15, 52]


def test_partition_complex_homology():
    for n, expected in [(3, {0: 2}), (4, {1: 6}), (5, {2: 24})]:
        PG = build_partition_poset(_points(n))
        homology = reduced_homology(order_complex(PG))
        assert homology.nonzero() == expected
        assert not homology.has_torsion()


def test_small_partition_posets_are_empty():
    assert build_partition_poset(_points(2)).size == 0


def test_partition_guard():
    with pytest.raises(GuardExceeded):
        build_partition_poset(_points(6), guard=5)


def test_equivariant_partition_guard_counts_points():
    G = cyclic_group(2)
    A = isovariant_gset(G, trivial_subgroup(G), 2)

    with pytest.raises(GuardExceeded) as excinfo:
        build_equivariant_partition_poset(A, whole_group(A.group), guard=3)

    assert "partition points guard exceeded: 4 > 3" in str(excinfo.value)


def test_invariant_partitions_of_swap():
    swap = Perm.from_cycles(3, [(0, 1)])
    found = invariant_partitions(3, [Perm.identity(3), swap])

    assert Partition.from_blocks([[0, 1], [2]]) in found
    assert Partition.from_blocks([[0, 2], [1]]) not in found
    assert len(found) == 3


def test_fixed_points_match_invariant_partitions():
    G = cyclic_group(2)
    A = isovariant_gset(G, trivial_subgroup(G), 2)

    comparison = verify_fixed_point_equivalence(A, whole_group(G))
    assert comparison.holds
    assert comparison.left_size == 5


def test_surjection_oracle_agrees():
    A = _c2_on_orbit_and_point()
    direct = build_equivariant_partition_poset(A, whole_group(A.group))

    assert equivariant_partitions_from_surjections(A) == list(direct.objects)
    assert [p.render(A.names) for p in direct.objects] == ["(a0 a1)(p1)"]


def test_orthogonal_complement_methods_agree():
    PG = build_partition_poset(_points(4))
    alpha = PG.index[Partition.from_blocks([[0, 1], [2, 3]])]

    bounds = orthogonal_complement(PG, alpha, "bounds")
    assert bounds == orthogonal_complement(PG, alpha, "lattice")
    assert len(bounds) == 6


def test_two_orbit_subposet_drops_single_orbit_quotients():
    A = _c2_on_orbit_and_point()
    PG = build_equivariant_partition_poset(A, whole_group(A.group))

    assert two_orbit_subposet(PG, A).size == PG.size == 1
    assert orbit_partition(A) == Partition.from_blocks([[0, 1], [2]])


def test_isovariant_wedge_prediction_for_free_c2():
    G = cyclic_group(2)
    A = isovariant_gset(G, trivial_subgroup(G), 2)
    prediction = isovariant_wedge_prediction(G, trivial_subgroup(G), 2)

    assert prediction.summands == 2
    assert prediction.nonzero() == {0: 2}
    assert equivariant_partition_homology(A).nonzero() == {0: 2}


def test_wedge_prediction_needs_two_orbits():
    G = cyclic_group(2)

    with pytest.raises(ValueError):
        isovariant_wedge_prediction(G, trivial_subgroup(G), 1)


def test_weyl_identity_for_free_c2():
    G = cyclic_group(2)
    report = weyl_identity_check(G, trivial_subgroup(G), 2)

    assert report.weyl_in_total == 4
    assert report.weyl_in_orbit == 1
    assert report.lhs == 2
    assert report.as_payload()["matches_m_minus_1"] is True
    assert report.as_payload()["matches_dm_minus_1"] is False


def _klein_four():
    return generate_group([Perm.from_cycles(4, [(0, 1)]), Perm.from_cycles(4, [(2, 3)])], 4)


def test_transitive_quotient_type_compares_block_stabilizers():
    G = _klein_four()
    first = subgroup_generated(G, [Perm.from_cycles(4, [(0, 1)])])
    second = subgroup_generated(G, [Perm.from_cycles(4, [(2, 3)])])
    A = coset_gset(G, second)
    singletons = Partition.from_blocks([[0], [1]])

    assert is_transitive_quotient_of_type(A, singletons, second)
    assert not is_transitive_quotient_of_type(A, singletons, first)


def test_transitive_quotient_type_allows_conjugate_subgroups():
    G = generate_group([Perm.from_cycles(3, [(0, 1)]), Perm.from_cycles(3, [(0, 1, 2)])], 3)
    H = subgroup_generated(G, [Perm.from_cycles(3, [(0, 1)])])
    K = subgroup_generated(G, [Perm.from_cycles(3, [(0, 2)])])
    A = coset_gset(G, H)

    assert is_transitive_quotient_of_type(A, Partition.from_blocks([[0], [1], [2]]), K)
