import pytest

from app.errors import GuardExceeded
from app.gsets import trivial_gset
from app.partitions import build_partition_poset
from app.perm_groups import Perm, symmetric_group, trivial_group
from app.posets import ActedPoset
from app.simplicial_homology import (
    SimplicialComplex,
    character,
    fixed_point_complex,
    induced_map_rank,
    lefschetz_number,
    order_complex,
    reduced_homology,
)

HOLLOW_TRIANGLE = [(0, 1), (1, 2), (0, 2)]
PROJECTIVE_PLANE = [
    (1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 2, 6),
    (2, 3, 5), (3, 4, 6), (2, 4, 5), (3, 5, 6), (2, 4, 6),
]


def _circle_with_s3():
    G = symmetric_group(3)
    return SimplicialComplex.from_simplices(
        3, HOLLOW_TRIANGLE, group=G, vertex_action=G.elements
    )


def test_circle_homology():
    K = _circle_with_s3()
    homology = reduced_homology(K)

    assert K.face_counts() == (3, 3)
    assert homology.nonzero() == {1: 1}
    assert homology.concentrated_in() == 1
    assert K.cone_apex() is None


def test_filled_triangle_is_acyclic_cone():
    K = SimplicialComplex.from_simplices(3, [(0, 1, 2)])

    assert reduced_homology(K).is_acyclic()
    assert K.cone_apex() == 0
    assert K.euler_characteristic() == 0


def test_empty_complex_has_homology_in_degree_minus_one():
    K = SimplicialComplex.from_simplices(0, [])

    assert K.dimension == -1
    assert reduced_homology(K).nonzero() == {-1: 1}


def test_projective_plane_torsion():
    simplices = [tuple(v - 1 for v in facet) for facet in PROJECTIVE_PLANE]
    homology = reduced_homology(SimplicialComplex.from_simplices(6, simplices))

    assert homology.nonzero() == {}
    assert homology.torsion[1] == (2,)
    assert homology.has_torsion()
    assert not homology.is_acyclic()


def test_sign_character_on_circle():
    K = _circle_with_s3()
    G = K.group
    chi = character(K, 1)
    transposition = G.index[Perm.from_cycles(3, [(0, 1)])]
    rotation = G.index[Perm.from_cycles(3, [(0, 1, 2)])]

    assert chi.values[G.id_index] == 1
    assert chi.values[transposition] == -1
    assert chi.values[rotation] == 1
    assert chi.is_class_function()
    assert character(K, 1, per_element=True) == chi


def test_lefschetz_number_matches_homology_trace():
    K = _circle_with_s3()
    chi = character(K, 1)

    for g, sigma in enumerate(K.group.elements):
        assert lefschetz_number(K, sigma) == -chi.values[g]


def test_reflection_fixes_two_points_of_circle():
    K = _circle_with_s3()
    fixed, vertices = fixed_point_complex(K, [Perm.identity(3), Perm.from_cycles(3, [(0, 1)])])

    assert len(vertices) == 2
    assert reduced_homology(fixed).nonzero() == {0: 1}


def test_induced_map_rank():
    K = _circle_with_s3()
    point = SimplicialComplex.from_simplices(1, [(0,)])

    assert induced_map_rank(K, K, [1, 2, 0], 1) == 1
    assert induced_map_rank(K, point, [0, 0, 0], 1) == 0


def test_order_complex_of_chain_poset_is_simplex():
    P = ActedPoset.from_relation(("a", "b", "c"), lambda x, y: x <= y)
    K = order_complex(P)

    assert K.facets() == [(0, 1, 2)]
    assert reduced_homology(K).is_acyclic()


def test_facet_text_format():
    K = SimplicialComplex.parse_facets("# circle\n0 1\n1 2\n0 2\n")

    assert K.export_facets() == "0 1\n0 2\n1 2\n"


def test_simplex_guard():
    with pytest.raises(GuardExceeded):
        SimplicialComplex.from_simplices(4, [(0, 1, 2, 3)], guard=5)


def test_rejects_out_of_range_vertex():
    with pytest.raises(ValueError):
        SimplicialComplex.from_simplices(2, [(0, 2)])


def _partition_complex(n):
    return order_complex(build_partition_poset(trivial_gset(trivial_group(), n)))


def _projective_plane():
    return SimplicialComplex.from_simplices(
        6, [tuple(v - 1 for v in facet) for facet in PROJECTIVE_PLANE]
    )


@pytest.mark.parametrize(
    "build", [_projective_plane, lambda: _partition_complex(4), lambda: _partition_complex(5)]
)
def test_boundary_squares_to_zero(build):
    K = build()

    for d in range(1, K.dimension + 1):
        assert K.boundary_matrix(d - 1).matmul(K.boundary_matrix(d)).is_zero()
