import pytest

from app.gsets import trivial_gset
from app.partitions import Partition, build_partition_poset, isovariant_gset
from app.perm_groups import cyclic_group, trivial_group, trivial_subgroup
from app.posets import chain_poset
from app.quillen import (
    PosetMap,
    certify_contractible,
    check_G_finality,
    check_G_initiality,
    check_realization_equivalence,
    fixed_homology,
    identity_map,
    last_vertex_map,
    overcategory,
    phi_map,
    undercategory,
)


def _points(n):
    return trivial_gset(trivial_group(), n)


def _free_c2_on_four():
    G = cyclic_group(2)
    return isovariant_gset(G, trivial_subgroup(G), 2)


def test_map_validation():
    P = build_partition_poset(_points(3))

    with pytest.raises(ValueError):
        PosetMap(P, P, (0, 1))


def test_identity_map_fibres():
    P = build_partition_poset(_points(4))
    top = P.index[Partition.from_blocks([[0, 1], [2, 3]])]
    Fm = identity_map(P)

    assert Fm.is_monotone() and Fm.is_equivariant()
    assert len(Fm.fibre(top, "over")) == 3
    assert Fm.fibre(top, "under") == [top]
    with pytest.raises(ValueError):
        Fm.fibre(top, "sideways")


def test_fibre_categories_carry_stabilizer_action():
    A = _free_c2_on_four()
    P = build_partition_poset(A)
    d = P.index[Partition.from_blocks([[0, 1], [2, 3]])]
    Fm = identity_map(P)

    over = overcategory(Fm, d)
    assert over.group.order == 2
    assert over.is_order_preserving_action()
    assert undercategory(Fm, d).size == 1


def test_identity_is_final_by_cone_points():
    report = check_G_finality(identity_map(build_partition_poset(_points(4))))

    assert report.passed
    assert report.certificate_counts() == {"cone-point": 13}


def test_last_vertex_map_is_initial():
    Fm = last_vertex_map(build_partition_poset(_points(4)))
    report = check_G_initiality(Fm)

    assert Fm.is_monotone() and Fm.is_equivariant()
    assert report.passed
    assert "simplicial-cone" in report.certificate_counts()
    assert report.as_payload()["failures"] == []


@pytest.mark.parametrize("gset", [_points(4), _free_c2_on_four()])
def test_phi_is_final(gset):
    Fm = phi_map(gset)

    assert Fm.is_monotone() and Fm.is_equivariant()
    assert check_G_finality(Fm).passed


def test_phi_realization_equivalence():
    report = check_realization_equivalence(phi_map(_points(4)))

    assert report.passed
    (entry,) = report.entries
    assert entry.source_betti == entry.target_betti == {1: 6}
    assert entry.map_ranks == {1: 6}
    assert report.unranked == ()


def test_realization_marks_unranked_subgroups_above_face_limit():
    report = check_realization_equivalence(phi_map(_points(4)), face_limit=1)

    (entry,) = report.entries
    assert not entry.ranks_checked
    assert entry.as_payload()["ranks_checked"] is False
    assert report.unranked == (entry.subgroup,)


def test_certificates_fail_on_disconnected_family():
    P = build_partition_poset(_points(3))

    assert certify_contractible(P, [0, 1]) == ""
    assert certify_contractible(P, []) == ""
    assert certify_contractible(P, [0]) == "cone-point"


def test_fixed_homology_uses_chain_complex_for_down_closed_families():
    chains = chain_poset(build_partition_poset(_points(4)))

    assert fixed_homology(chains, list(range(chains.size))).nonzero() == {1: 6}
