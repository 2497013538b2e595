from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from app.constants import DEFAULT_SIMPLEX_GUARD
from app.errors import check_guard
from app.linalg import IntegerMatrix, smith_normal_form, to_fraction
from app.perm_groups import Group, Perm
from app.posets import ActedPoset, enumerate_chains

logger = logging.getLogger(__name__)

Simplex = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """Abstract simplicial complex; ``faces[d]`` lists the d-simplices as sorted tuples."""

    vertex_count: int
    faces: Tuple[Tuple[Simplex, ...], ...]
    group: Optional[Group] = None
    vertex_action: Optional[Tuple[Perm, ...]] = None
    vertex_labels: Optional[Tuple[str, ...]] = None

    @classmethod
    def from_simplices(
        cls,
        vertex_count: int,
        simplices: Iterable[Sequence[int]],
        group: Optional[Group] = None,
        vertex_action: Optional[Sequence[Perm]] = None,
        vertex_labels: Optional[Sequence[str]] = None,
        closed: bool = False,
        guard: int = DEFAULT_SIMPLEX_GUARD,
    ) -> "SimplicialComplex":
        """Build from any generating simplices; faces are added unless ``closed`` is set."""
        all_faces: set = set()
        for simplex in simplices:
            s = tuple(sorted(simplex))
            if len(set(s)) != len(s):
                raise ValueError(f"Simplex with repeated vertices: {simplex}")
            if not s:
                continue
            if s[0] < 0 or s[-1] >= vertex_count:
                raise ValueError(f"Simplex {s} uses vertices outside 0..{vertex_count - 1}")
            if closed:
                all_faces.add(s)
            else:
                for k in range(1, len(s) + 1):
                    all_faces.update(itertools.combinations(s, k))
            check_guard("simplex count", guard, len(all_faces))
        dim = max((len(s) for s in all_faces), default=0) - 1
        by_dim: List[List[Simplex]] = [[] for _ in range(dim + 1)]
        for s in all_faces:
            by_dim[len(s) - 1].append(s)
        faces = tuple(tuple(sorted(level)) for level in by_dim)
        return cls(
            vertex_count=vertex_count,
            faces=faces,
            group=group,
            vertex_action=tuple(vertex_action) if vertex_action is not None else None,
            vertex_labels=tuple(vertex_labels) if vertex_labels is not None else None,
        )

    @property
    def dimension(self) -> int:
        return len(self.faces) - 1

    def face_count(self, d: int) -> int:
        if d == -1:
            return 1
        if d < -1 or d > self.dimension:
            return 0
        return len(self.faces[d])

    def face_counts(self) -> Tuple[int, ...]:
        return tuple(len(level) for level in self.faces)

    def simplices(self, d: int) -> Tuple[Simplex, ...]:
        if d == -1:
            return ((),)
        if d < -1 or d > self.dimension:
            return ()
        return self.faces[d]

    @cached_property
    def positions(self) -> Tuple[Dict[Simplex, int], ...]:
        return tuple({s: k for k, s in enumerate(level)} for level in self.faces)

    def position(self, simplex: Simplex) -> Optional[int]:
        d = len(simplex) - 1
        if d == -1:
            return 0
        if d > self.dimension:
            return None
        return self.positions[d].get(simplex)

    def contains(self, simplex: Sequence[int]) -> bool:
        return self.position(tuple(sorted(simplex))) is not None

    def boundary_matrix(self, d: int) -> IntegerMatrix:
        """Boundary C_d -> C_{d-1} of the augmented chain complex (C_{-1} = Z)."""
        rows = self.face_count(d - 1)
        cols = self.face_count(d)
        entries: Dict[Tuple[int, int], int] = {}
        if d == 0:
            for j in range(cols):
                entries[(0, j)] = 1
        elif d >= 1:
            lower = self.positions[d - 1]
            for j, simplex in enumerate(self.simplices(d)):
                for i in range(len(simplex)):
                    face = simplex[:i] + simplex[i + 1 :]
                    entries[(lower[face], j)] = -1 if i % 2 else 1
        return IntegerMatrix(rows, cols, entries)

    def facets(self) -> List[Simplex]:
        result = []
        for d in range(self.dimension, -1, -1):
            higher = self.faces[d + 1] if d + 1 <= self.dimension else ()
            covered = set()
            for s in higher:
                for i in range(len(s)):
                    covered.add(s[:i] + s[i + 1 :])
            result.extend(s for s in self.faces[d] if s not in covered)
        return sorted(result, key=lambda s: (-len(s), s))

    def cone_apex(self) -> Optional[int]:
        """A vertex lying in every facet, if any."""
        facets = self.facets()
        if not facets:
            return None
        common = set(facets[0])
        for facet in facets[1:]:
            common &= set(facet)
            if not common:
                return None
        return min(common)

    def is_simplicial_map(self, sigma: Perm) -> bool:
        if sigma.degree != self.vertex_count:
            return False
        return all(
            self.contains([sigma(v) for v in simplex]) for level in self.faces for simplex in level
        )

    def export_facets(self) -> str:
        return "".join(" ".join(str(v) for v in facet) + "\n" for facet in self.facets())

    @classmethod
    def parse_facets(cls, text: str, vertex_count: Optional[int] = None) -> "SimplicialComplex":
        simplices = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                simplices.append(tuple(int(tok) for tok in stripped.split()))
            except ValueError as exc:
                raise ValueError(f"line {line_no}: expected vertex indices, got {line!r}") from exc
        count = vertex_count
        if count is None:
            count = 1 + max((max(s) for s in simplices if s), default=-1)
        return cls.from_simplices(count, simplices)

    def euler_characteristic(self, reduced: bool = True) -> int:
        total = sum((-1) ** d * len(level) for d, level in enumerate(self.faces))
        return total - 1 if reduced else total


@dataclass(frozen=True)
class HomologyResult:
    betti: Dict[int, int]
    torsion: Dict[int, Tuple[int, ...]]
    reduced: bool = True

    def nonzero(self) -> Dict[int, int]:
        return {d: b for d, b in sorted(self.betti.items()) if b}

    def is_acyclic(self) -> bool:
        return not self.nonzero() and not self.has_torsion()

    def has_torsion(self) -> bool:
        return any(self.torsion.values())

    def concentrated_in(self) -> Optional[int]:
        degrees = list(self.nonzero())
        return degrees[0] if len(degrees) == 1 else None

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * b for d, b in self.betti.items())

    def as_payload(self) -> Dict[str, object]:
        return {
            "reduced_betti": {str(d): b for d, b in self.nonzero().items()},
            "torsion": {str(d): list(t) for d, t in sorted(self.torsion.items()) if t},
        }


def order_complex(P: ActedPoset, guard: int = DEFAULT_SIMPLEX_GUARD) -> SimplicialComplex:
    chains = enumerate_chains(P, guard=guard)
    action = tuple(Perm(row) for row in P.action) if P.size else None
    return SimplicialComplex.from_simplices(
        P.size,
        chains,
        group=P.group if P.size else None,
        vertex_action=action,
        closed=True,
        guard=guard,
    )


def reduced_homology(K: SimplicialComplex) -> HomologyResult:
    top = K.dimension
    ranks: Dict[int, int] = {}
    torsion_of: Dict[int, Tuple[int, ...]] = {}
    for d in range(0, top + 1):
        snf = smith_normal_form(K.boundary_matrix(d))
        ranks[d] = snf.rank
        torsion_of[d] = snf.torsion
    betti: Dict[int, int] = {}
    torsion: Dict[int, Tuple[int, ...]] = {}
    for d in range(-1, top + 1):
        betti[d] = K.face_count(d) - ranks.get(d, 0) - ranks.get(d + 1, 0)
        torsion[d] = torsion_of.get(d + 1, ())
    result = HomologyResult(betti=betti, torsion=torsion)
    logger.debug(
        "homology.computed",
        extra={"face_counts": list(K.face_counts()), "reduced_betti": result.nonzero()},
    )
    return result


def _signed_image(simplex: Simplex, sigma: Perm) -> Tuple[Simplex, int]:
    images = [sigma(v) for v in simplex]
    order = sorted(range(len(images)), key=lambda k: images[k])
    inversions = sum(
        1 for a in range(len(order)) for b in range(a + 1, len(order)) if order[a] > order[b]
    )
    return tuple(images[k] for k in order), (-1 if inversions % 2 else 1)


def _qq_rows(M: DomainMatrix) -> List[Dict[int, object]]:
    rows: List[Dict[int, object]] = [dict() for _ in range(M.shape[0])]
    for (i, j), v in M.to_dok().items():
        if v:
            rows[i][j] = v
    return rows


class HomologyBasis:
    """Rational cycle representatives for H~_d and a solver for coordinates."""

    def __init__(self, K: SimplicialComplex, d: int) -> None:
        self.complex = K
        self.degree = d
        n = K.face_count(d)
        self.chain_dim = n
        if n == 0:
            self.cycles: List[Dict[int, object]] = []
            self.boundary_count = 0
            return
        boundary_out = K.boundary_matrix(d).to_domain_matrix()
        if boundary_out.shape[0]:
            z_basis = boundary_out.nullspace()
        else:
            z_basis = DomainMatrix.eye(n, QQ)
        boundary_in = K.boundary_matrix(d + 1)
        if boundary_in.cols and not boundary_in.is_zero():
            b_rref, b_pivots = boundary_in.transpose().to_domain_matrix().rref()
            b_basis = b_rref.extract(list(range(len(b_pivots))), list(range(n)))
        else:
            b_basis = DomainMatrix.zeros((0, n), QQ)
        self.boundary_count = b_basis.shape[0]

        stacked = b_basis.vstack(z_basis) if b_basis.shape[0] else z_basis
        picked = list(stacked.transpose().rref()[1]) if stacked.shape[0] else []
        cycle_rows = [k for k in picked if k >= self.boundary_count]
        basis = stacked.extract(picked, list(range(n)))
        self.cycles = _qq_rows(stacked.extract(cycle_rows, list(range(n)))) if cycle_rows else []

        if picked:
            _, columns = basis.rref()
            self.columns = list(columns)
            self.solver = basis.extract(list(range(len(picked))), self.columns).inv()
        else:
            self.columns = []
            self.solver = None

    @property
    def rank(self) -> int:
        return len(self.cycles)

    def coordinates(self, chain: Dict[int, object]) -> List[object]:
        """Homology coordinates of a d-cycle given as {simplex position: coefficient}."""
        if not self.cycles:
            return []
        row = DomainMatrix(
            [[chain.get(c, QQ(0)) for c in self.columns]], (1, len(self.columns)), QQ
        )
        coeffs = (row * self.solver).to_list()[0]
        return coeffs[self.boundary_count :]

    def push(self, cycle: Dict[int, object], sigma: Perm) -> Dict[int, object]:
        K = self.complex
        level = K.simplices(self.degree)
        out: Dict[int, object] = {}
        for pos, coeff in cycle.items():
            image, sign = _signed_image(level[pos], sigma) if self.degree >= 0 else ((), 1)
            target = K.position(image)
            if target is None:
                raise ValueError(
                    f"{sigma} is not simplicial: {level[pos]} maps outside the complex"
                )
            out[target] = out.get(target, QQ(0)) + (coeff if sign > 0 else -coeff)
        return out


def induced_homology_action(
    K: SimplicialComplex, sigma: Perm, d: int, basis: Optional[HomologyBasis] = None
) -> DomainMatrix:
    """Matrix of sigma on H~_d(K; Q); column i holds the image of the i-th basis class."""
    if not K.is_simplicial_map(sigma):
        raise ValueError(f"{sigma} is not a simplicial automorphism")
    basis = basis or HomologyBasis(K, d)
    k = basis.rank
    columns = [basis.coordinates(basis.push(cycle, sigma)) for cycle in basis.cycles]
    rows = [[columns[j][i] for j in range(k)] for i in range(k)]
    return DomainMatrix(rows, (k, k), QQ)


@dataclass(frozen=True)
class CharacterVector:
    group: Group
    degree: int
    values: Tuple[Fraction, ...]

    def by_class(self) -> Tuple[Fraction, ...]:
        return tuple(self.values[members[0]] for members in self.group.conjugacy_classes)

    def is_class_function(self) -> bool:
        return all(
            len({self.values[m] for m in members}) == 1 for members in self.group.conjugacy_classes
        )


def character(
    K: SimplicialComplex, d: int, per_element: bool = False
) -> CharacterVector:
    """Character of the vertex action on H~_d(K; Q).

    Traces are computed on conjugacy class representatives and spread over the class,
    unless ``per_element`` asks for every element separately.
    """
    if K.group is None or K.vertex_action is None:
        raise ValueError("The complex carries no group action")
    G = K.group
    basis = HomologyBasis(K, d)
    values: List[Fraction] = [Fraction(0)] * G.order
    targets = (
        [[g] for g in range(G.order)] if per_element else [list(c) for c in G.conjugacy_classes]
    )
    for members in targets:
        matrix = induced_homology_action(K, K.vertex_action[members[0]], d, basis)
        trace = sum((to_fraction(matrix[i, i].element) for i in range(basis.rank)), Fraction(0))
        for g in members:
            values[g] = trace
    return CharacterVector(G, d, tuple(values))


def chain_trace(K: SimplicialComplex, sigma: Perm, d: int) -> int:
    """Trace of sigma on the oriented chain group C~_d."""
    if d == -1:
        return 1
    total = 0
    for simplex in K.simplices(d):
        image, sign = _signed_image(simplex, sigma)
        if image == simplex:
            total += sign
    return total


def lefschetz_number(K: SimplicialComplex, sigma: Perm) -> int:
    """Alternating chain-level trace over the augmented complex (Hopf trace formula)."""
    return sum((-1) ** d * chain_trace(K, sigma, d) for d in range(-1, K.dimension + 1))


def fixed_point_complex(K: SimplicialComplex, members: Sequence[Perm]) -> Tuple[
    SimplicialComplex, Tuple[frozenset, ...]
]:
    """Complex of the fixed points of a simplicial action on the realization.

    Vertices are orbits of vertices spanning an invariant simplex (barycenters of orbits);
    simplices come from invariant simplices.
    """
    invariant = []
    for level in K.faces:
        for simplex in level:
            as_set = set(simplex)
            if all({p(v) for v in simplex} == as_set for p in members):
                invariant.append(simplex)
    orbit_sets = set()
    simplex_orbits = []
    for simplex in invariant:
        orbs = frozenset(frozenset(p(v) for p in members) for v in simplex)
        orbit_sets.update(orbs)
        simplex_orbits.append(orbs)
    vertices = tuple(sorted(orbit_sets, key=lambda o: (len(o), sorted(o))))
    lookup = {o: k for k, o in enumerate(vertices)}
    simplices = [tuple(lookup[o] for o in orbs) for orbs in simplex_orbits]
    return SimplicialComplex.from_simplices(len(vertices), simplices), vertices


def induced_map_rank(
    K: SimplicialComplex, L: SimplicialComplex, vertex_map: Sequence[int], d: int
) -> int:
    """Rank of the map H~_d(K; Q) -> H~_d(L; Q) induced by a simplicial vertex map."""
    source = HomologyBasis(K, d)
    target = HomologyBasis(L, d)
    if source.rank == 0 or target.rank == 0:
        return 0
    level = K.simplices(d)
    columns = []
    for cycle in source.cycles:
        image: Dict[int, object] = {}
        for pos, coeff in cycle.items():
            mapped = [vertex_map[v] for v in level[pos]]
            if len(set(mapped)) < len(mapped):
                continue
            order = sorted(range(len(mapped)), key=lambda k: mapped[k])
            inversions = sum(
                1
                for a in range(len(order))
                for b in range(a + 1, len(order))
                if order[a] > order[b]
            )
            simplex = tuple(mapped[k] for k in order)
            target_pos = L.position(simplex)
            if target_pos is None:
                raise ValueError(f"Vertex map sends {level[pos]} outside the target complex")
            signed = -coeff if inversions % 2 else coeff
            image[target_pos] = image.get(target_pos, QQ(0)) + signed
        columns.append(target.coordinates(image))
    matrix = DomainMatrix(
        [[columns[j][i] for j in range(source.rank)] for i in range(target.rank)],
        (target.rank, source.rank),
        QQ,
    )
    return matrix.rank()
