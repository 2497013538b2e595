from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from sympy.utilities.iterables import multiset_partitions

from app.constants import (
    DEFAULT_PARTITION_GUARD,
    DEFAULT_SIMPLEX_GUARD,
    DEFAULT_SURJECTION_ORACLE_POINTS,
    DEFAULT_WEYL_GUARD,
    DEFAULT_ISO_NODE_CAP,
)
from app.errors import check_guard
from app.gsets import (
    GSet,
    block_orbit_count,
    block_stabilizer,
    coset_gset,
    disjoint_union,
    gset_from_terms,
    orbit_prefix,
    orbits,
    stabilizer,
    trivial_gset,
)
from app.perm_groups import (
    Group,
    Perm,
    Subgroup,
    all_subgroups,
    are_conjugate,
    between_subgroup_poset,
    conjugacy_class_key,
    coset_action,
    generate_group,
    normalizer,
    symmetric_normalizer_order,
    trivial_group,
    whole_group,
)
from app.posets import ActedPoset, PosetComparison, compare_posets
from app.simplicial_homology import HomologyResult, order_complex, reduced_homology

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Partition:
    """A set partition of {0, ..., size - 1}; blocks sorted, ordered by smallest point."""

    size: int
    blocks: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_blocks(
        cls, blocks: Iterable[Iterable[int]], size: Optional[int] = None
    ) -> "Partition":
        canonical = tuple(sorted(tuple(sorted(b)) for b in blocks if b))
        points = [p for b in canonical for p in b]
        n = len(points) if size is None else size
        if sorted(points) != list(range(n)):
            raise ValueError(f"Blocks {canonical} do not partition {n} points")
        return cls(n, canonical)

    @classmethod
    def discrete(cls, n: int) -> "Partition":
        return cls(n, tuple((i,) for i in range(n)))

    @classmethod
    def indiscrete(cls, n: int) -> "Partition":
        return cls(n, (tuple(range(n)),) if n else ())

    @cached_property
    def owner(self) -> Tuple[int, ...]:
        lookup = [0] * self.size
        for k, block in enumerate(self.blocks):
            for p in block:
                lookup[p] = k
        return tuple(lookup)

    def is_discrete(self) -> bool:
        return len(self.blocks) == self.size

    def is_indiscrete(self) -> bool:
        return len(self.blocks) <= 1

    def is_trivial(self) -> bool:
        return self.is_discrete() or self.is_indiscrete()

    def coarsens(self, other: "Partition") -> bool:
        """Every block of ``other`` lies inside a block of self."""
        owner = self.owner
        return all(len({owner[p] for p in block}) == 1 for block in other.blocks)

    def meet(self, other: "Partition") -> "Partition":
        pieces: Dict[Tuple[int, int], List[int]] = {}
        for p in range(self.size):
            pieces.setdefault((self.owner[p], other.owner[p]), []).append(p)
        return Partition.from_blocks(pieces.values(), self.size)

    def join(self, other: "Partition") -> "Partition":
        parent = list(range(self.size))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for block in itertools.chain(self.blocks, other.blocks):
            root = find(block[0])
            for p in block[1:]:
                parent[find(p)] = root
        groups: Dict[int, List[int]] = {}
        for p in range(self.size):
            groups.setdefault(find(p), []).append(p)
        return Partition.from_blocks(groups.values(), self.size)

    def image(self, perm: Perm) -> "Partition":
        return Partition.from_blocks(([perm(p) for p in block] for block in self.blocks), self.size)

    def block_action(self, perm: Perm) -> Tuple[int, ...]:
        """Induced permutation of block indices; the partition must be invariant under perm."""
        result = []
        for block in self.blocks:
            targets = {self.owner[perm(p)] for p in block}
            if len(targets) != 1:
                raise ValueError(f"{perm} does not preserve the blocks of {self.render()}")
            target = targets.pop()
            if len(self.blocks[target]) != len(block):
                raise ValueError(f"{perm} does not preserve the blocks of {self.render()}")
            result.append(target)
        return tuple(result)

    def is_invariant(self, perms: Iterable[Perm]) -> bool:
        return all(self.image(p) == self for p in perms)

    def render(self, names: Optional[Sequence[str]] = None) -> str:
        label = (lambda p: names[p]) if names is not None else (lambda p: str(p + 1))
        return "".join("(" + " ".join(label(p) for p in block) + ")" for block in self.blocks)

    def __str__(self) -> str:
        return self.render()


def _poset_sort_key(p: Partition) -> Tuple[int, Tuple[Tuple[int, ...], ...]]:
    return (-len(p.blocks), p.blocks)


def _coarsenings(p: Partition) -> List[Partition]:
    k = len(p.blocks)
    result = []
    for grouping in multiset_partitions(list(range(k))):
        merged = Partition.from_blocks(
            ([point for i in part for point in p.blocks[i]] for part in grouping), p.size
        )
        result.append(merged)
    return result


def set_partitions(n: int) -> List[Partition]:
    if n == 0:
        return [Partition(0, ())]
    return [Partition.from_blocks(blocks, n) for blocks in multiset_partitions(list(range(n)))]


def build_partition_poset(A: GSet, guard: int = DEFAULT_PARTITION_GUARD) -> ActedPoset:
    """Non-trivial partitions of the points of A, ordered by coarsening, with the G-action."""
    check_guard("partition points", guard, A.size)
    act = lambda g, p: p.image(A.perm(g))  # noqa: E731
    if A.size < 3:
        return ActedPoset.from_up_sets([], [], group=A.group, act=act)

    objects = sorted((p for p in set_partitions(A.size) if not p.is_trivial()), key=_poset_sort_key)
    lookup = {p: i for i, p in enumerate(objects)}
    ups = [
        frozenset(lookup[q] for q in _coarsenings(p) if q in lookup) for p in objects
    ]
    poset = ActedPoset.from_up_sets(objects, ups, group=A.group, act=act)
    logger.debug(
        "partition_poset.built",
        extra={"points": A.size, "objects": poset.size, "relations": poset.relation_count()},
    )
    return poset


def _pair_partition(size: int, a: int, b: int) -> Partition:
    return Partition.from_blocks([[a, b]] + [[p] for p in range(size) if p not in (a, b)], size)


def _orbit_closure(size: int, perms: Sequence[Perm], a: int, b: int) -> Partition:
    """Finest partition invariant under perms with a and b in one block."""
    result = _pair_partition(size, a, b)
    for perm in perms:
        result = result.join(_pair_partition(size, perm(a), perm(b)))
    return result


def invariant_partitions(size: int, perms: Sequence[Perm]) -> List[Partition]:
    """Every partition invariant under perms, as joins of invariant pair closures."""
    generators = sorted(
        {_orbit_closure(size, perms, a, b) for a, b in itertools.combinations(range(size), 2)},
        key=_poset_sort_key,
    )
    found: Set[Partition] = {Partition.discrete(size)}
    frontier = list(found)
    while frontier:
        fresh = []
        for p in frontier:
            for q in generators:
                joined = p.join(q)
                if joined not in found:
                    found.add(joined)
                    fresh.append(joined)
        frontier = fresh
    return sorted(found, key=_poset_sort_key)


def _poset_on(objects: Sequence[Partition]) -> ActedPoset:
    ups = [
        frozenset(
            j
            for j, q in enumerate(objects)
            if len(q.blocks) <= len(p.blocks) and q.coarsens(p)
        )
        for p in objects
    ]
    return ActedPoset.from_up_sets(objects, ups)


def build_equivariant_partition_poset(
    A: GSet, H: Subgroup, guard: int = DEFAULT_PARTITION_GUARD
) -> ActedPoset:
    """Non-trivial H-invariant partitions of A ordered by coarsening, with trivial action."""
    if H.parent is not A.group:
        raise ValueError("H is not a subgroup of the acting group")
    check_guard("partition points", guard, A.size)
    perms = [A.perm(h) for h in sorted(H.members)]
    if A.size < 3:
        return ActedPoset.from_up_sets([], [])
    objects = [p for p in invariant_partitions(A.size, perms) if not p.is_trivial()]
    poset = _poset_on(objects)
    logger.debug(
        "equivariant_partition_poset.built",
        extra={"points": A.size, "subgroup_order": H.order, "objects": poset.size},
    )
    return poset


def _gsets_of_size(K: Group, size: int) -> List[GSet]:
    """K-sets of the given size up to isomorphism, as sums of cosets of class representatives."""
    reps: Dict[Tuple[int, ...], Subgroup] = {}
    for sub in all_subgroups(K):
        reps.setdefault(conjugacy_class_key(sub), sub)
    types = sorted(reps.values(), key=lambda s: s.sort_key)
    found = []

    def extend(start: int, remaining: int, chosen: List[Subgroup]) -> None:
        if remaining == 0:
            terms = [(f"o{k}", sub, 1) for k, sub in enumerate(chosen)]
            found.append(gset_from_terms(K, terms))
            return
        for k in range(start, len(types)):
            orbit = K.order // types[k].order
            if orbit <= remaining:
                extend(k, remaining - orbit, chosen + [types[k]])

    extend(0, size, [])
    return found


def equivariant_partitions_from_surjections(
    A_prime: GSet, guard: int = DEFAULT_SURJECTION_ORACLE_POINTS
) -> List[Partition]:
    """Fibre partitions of K-surjections A' ->> B over every K-set B with 2 <= |B| < |A'|.

    Slow oracle for the invariant-partition construction; K is the acting group of A'.
    """
    check_guard("surjection oracle points", guard, A_prime.size)
    K = A_prime.group
    reps = [orbit[0] for orbit in orbits(A_prime)]
    rep_stabs = [stabilizer(A_prime, a) for a in reps]
    fibres: Set[Partition] = set()
    for size in range(2, A_prime.size):
        for B in _gsets_of_size(K, size):
            choices = []
            for stab in rep_stabs:
                choices.append(
                    [b for b in range(B.size) if all(B.act(h, b) == b for h in stab.members)]
                )
            for images in itertools.product(*choices):
                f = [0] * A_prime.size
                for a, b in zip(reps, images):
                    for g in range(K.order):
                        f[A_prime.act(g, a)] = B.act(g, b)
                if len(set(f)) != B.size:
                    continue
                blocks: Dict[int, List[int]] = {}
                for a, b in enumerate(f):
                    blocks.setdefault(b, []).append(a)
                fibres.add(Partition.from_blocks(blocks.values(), A_prime.size))
    return sorted(fibres, key=_poset_sort_key)


def verify_fixed_point_equivalence(
    A: GSet,
    H: Subgroup,
    guard: int = DEFAULT_PARTITION_GUARD,
    node_cap: int = DEFAULT_ISO_NODE_CAP,
) -> PosetComparison:
    fixed = build_partition_poset(A, guard=guard).fixed_subposet(H)
    direct = build_equivariant_partition_poset(A, H, guard=guard)
    return compare_posets(fixed, direct, node_cap=node_cap, render=lambda p: p.render(A.names))


def two_orbit_subposet(PG: ActedPoset, A: GSet) -> ActedPoset:
    """Objects of PG whose blocks fall into at least two orbits."""
    keep = [i for i, p in enumerate(PG.objects) if block_orbit_count(A, p.blocks) >= 2]
    return PG.subposet(keep, keep_action=False)


def orthogonal_complement(PG: ActedPoset, alpha: int, method: str = "bounds") -> List[int]:
    """Objects with neither a common lower nor a common upper bound with ``alpha``.

    ``"bounds"`` searches inside PG; ``"lattice"`` asks for meet discrete and join
    indiscrete in the full partition lattice.
    """
    if alpha < 0 or alpha >= PG.size:
        raise ValueError(f"Object {alpha} out of range for a poset of size {PG.size}")
    if method == "bounds":
        return [
            beta
            for beta in range(PG.size)
            if beta != alpha
            and not (PG.up[alpha] & PG.up[beta])
            and not (PG.down[alpha] & PG.down[beta])
        ]
    if method == "lattice":
        a = PG.objects[alpha]
        return [
            beta
            for beta, b in enumerate(PG.objects)
            if beta != alpha and a.meet(b).is_discrete() and a.join(b).is_indiscrete()
        ]
    raise ValueError(f"Unknown orthogonality method {method!r}")


def orbit_partition(A: GSet) -> Partition:
    return Partition.from_blocks(orbits(A), A.size)


def is_transitive_quotient_of_type(A: GSet, p: Partition, H: Subgroup) -> bool:
    """The blocks of p form a single orbit isomorphic to G/H."""
    if block_orbit_count(A, p.blocks) != 1:
        return False
    return are_conjugate(block_stabilizer(A, p.blocks[0]), H)


def isovariant_gset(G: Group, H: Subgroup, m: int) -> GSet:
    """The disjoint union of m copies of G/H, orbits prefixed a, b, c, ..."""
    result: Optional[GSet] = None
    for k in range(m):
        piece = coset_gset(G, H, prefix=orbit_prefix(k))
        result = piece if result is None else disjoint_union(result, piece)
    if result is None:
        raise ValueError("An isovariant G-set needs at least one orbit")
    return result


@dataclass(frozen=True)
class WedgePrediction:
    betti: Dict[int, int]
    summands: int
    weyl_order: int
    subgroup_homology: Optional[HomologyResult]
    partition_homology: HomologyResult
    rational_only: bool
    degenerate: bool

    def nonzero(self) -> Dict[int, int]:
        return {d: b for d, b in sorted(self.betti.items()) if b}


def isovariant_wedge_prediction(
    G: Group, H: Subgroup, m: int, guard: int = DEFAULT_PARTITION_GUARD
) -> WedgePrediction:
    """Reduced Betti numbers of the wedge of |W_G(H)|^(m-1) smashes of unreduced suspensions."""
    if m < 2:
        raise ValueError(f"The wedge decomposition needs at least two orbits, got {m}")
    if H.parent is not G:
        raise ValueError("H is not a subgroup of G")
    partition_side = reduced_homology(
        order_complex(build_partition_poset(trivial_gset(trivial_group(), m), guard=guard))
    )
    if H.is_whole():
        return WedgePrediction(
            betti=partition_side.nonzero(),
            summands=1,
            weyl_order=1,
            subgroup_homology=None,
            partition_homology=partition_side,
            rational_only=partition_side.has_torsion(),
            degenerate=True,
        )

    weyl_order = normalizer(G, H).order // H.order
    subgroup_side = reduced_homology(order_complex(between_subgroup_poset(G, H)))
    summands = weyl_order ** (m - 1)
    betti: Dict[int, int] = {}
    for i, b_i in subgroup_side.nonzero().items():
        for j, b_j in partition_side.nonzero().items():
            degree = i + j + 2
            betti[degree] = betti.get(degree, 0) + summands * b_i * b_j
    rational_only = subgroup_side.has_torsion() or partition_side.has_torsion()
    if rational_only:
        logger.warning(
            "wedge_prediction.torsion",
            extra={"group_order": G.order, "subgroup_order": H.order, "orbits": m},
        )
    return WedgePrediction(
        betti=dict(sorted(betti.items())),
        summands=summands,
        weyl_order=weyl_order,
        subgroup_homology=subgroup_side,
        partition_homology=partition_side,
        rational_only=rational_only,
        degenerate=False,
    )


def equivariant_partition_homology(
    A: GSet, guard: int = DEFAULT_PARTITION_GUARD, simplex_guard: int = DEFAULT_SIMPLEX_GUARD
) -> HomologyResult:
    PG = build_equivariant_partition_poset(A, whole_group(A.group), guard=guard)
    return reduced_homology(order_complex(PG, guard=simplex_guard))


@dataclass(frozen=True)
class WeylIdentityReport:
    d: int
    m: int
    weyl_in_total: Fraction
    weyl_in_orbit: Fraction
    orbit_permutations: int
    weyl_in_group: int
    lhs: Fraction
    rhs_orbit_reading: int
    rhs_point_reading: int

    def as_payload(self) -> Dict[str, object]:
        return {
            "d": self.d,
            "m": self.m,
            "weyl_sigma_dm": str(self.weyl_in_total),
            "weyl_sigma_d": str(self.weyl_in_orbit),
            "m_factorial": self.orbit_permutations,
            "weyl_g_h": self.weyl_in_group,
            "lhs": str(self.lhs),
            "rhs_exponent_m_minus_1": self.rhs_orbit_reading,
            "rhs_exponent_dm_minus_1": self.rhs_point_reading,
            "matches_m_minus_1": self.lhs == self.rhs_orbit_reading,
            "matches_dm_minus_1": self.lhs == self.rhs_point_reading,
        }


def weyl_identity_check(
    G: Group, H: Subgroup, m: int, guard: int = DEFAULT_WEYL_GUARD
) -> WeylIdentityReport:
    """Both sides of the wedge-count identity for G acting on m copies of G/H."""
    if H.parent is not G:
        raise ValueError("H is not a subgroup of G")
    orbit_action = coset_action(G, H)
    d = orbit_action[0].degree
    check_guard("normalizer scan degree", guard, d * m)

    image_on_orbit = generate_group(list(set(orbit_action)), d)
    diagonal = [
        Perm(tuple(k * d + p.images[i] for k in range(m) for i in range(d)))
        for p in image_on_orbit.generators
    ]
    image_on_all = generate_group(diagonal, d * m)

    weyl_in_total = Fraction(
        symmetric_normalizer_order(diagonal, d * m, guard=guard), image_on_all.order
    )
    weyl_in_orbit = Fraction(
        symmetric_normalizer_order(image_on_orbit.generators, d, guard=guard), image_on_orbit.order
    )
    weyl_in_group = normalizer(G, H).order // H.order
    lhs = weyl_in_total / (weyl_in_orbit * factorial(m))
    report = WeylIdentityReport(
        d=d,
        m=m,
        weyl_in_total=weyl_in_total,
        weyl_in_orbit=weyl_in_orbit,
        orbit_permutations=factorial(m),
        weyl_in_group=weyl_in_group,
        lhs=lhs,
        rhs_orbit_reading=weyl_in_group ** (m - 1),
        rhs_point_reading=weyl_in_group ** (d * m - 1),
    )
    logger.info("weyl_identity.computed", extra=report.as_payload())
    return report
