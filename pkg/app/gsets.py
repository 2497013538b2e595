from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from app.perm_groups import (
    Group,
    Perm,
    Subgroup,
    are_conjugate,
    conjugacy_class_key,
    coset_action,
    is_subconjugate,
    left_cosets,
    subgroup_generated,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GSet:
    group: Group
    action: Tuple[Perm, ...]
    names: Tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.action) != self.group.order:
            raise ValueError(
                f"Action table has {len(self.action)} rows for a group of order {self.group.order}"
            )
        for perm in self.action:
            if perm.degree != len(self.names):
                raise ValueError(
                    f"Action permutation of degree {perm.degree} on {len(self.names)} points"
                )
        if len(set(self.names)) != len(self.names):
            raise ValueError("Point names must be distinct")

    @property
    def size(self) -> int:
        return len(self.names)

    def act(self, g: int, point: int) -> int:
        if point < 0 or point >= self.size:
            raise ValueError(f"Point {point} out of range for a G-set of size {self.size}")
        return self.action[g].images[point]

    def perm(self, g: int) -> Perm:
        return self.action[g]

    def describe(self) -> str:
        return " + ".join(
            f"G/{stabilizer(self, orbit[0]).label()}" for orbit in orbits(self)
        ) or "empty"


@dataclass(frozen=True)
class OrbitTypeSignature:
    """Multiset of (stabilizer conjugacy-class key, multiplicity)."""

    entries: Tuple[Tuple[Tuple[int, ...], int], ...]

    def total_size(self, group_order: int) -> int:
        return sum(group_order // len(key) * count for key, count in self.entries)

    def contains(self, other: "OrbitTypeSignature") -> bool:
        mine = dict(self.entries)
        return all(mine.get(key, 0) >= count for key, count in other.entries)


def orbit_prefix(k: int) -> str:
    """Point-name prefix of the k-th coset orbit: a, b, c, ..."""
    letters = "abcdefghijklmnopqrstuvwxyz"
    return letters[k] if k < len(letters) else f"o{k}_"


def trivial_gset(G: Group, n: int, prefix: str = "") -> GSet:
    identity = Perm.identity(n)
    names = tuple(f"{prefix}{i + 1}" for i in range(n))
    return GSet(G, tuple(identity for _ in range(G.order)), names)


def natural_gset(G: Group) -> GSet:
    return GSet(G, G.elements, tuple(str(i + 1) for i in range(G.degree)))


def coset_gset(G: Group, H: Subgroup, prefix: str = "c") -> GSet:
    if H.parent is not G:
        raise ValueError("H is not a subgroup of G")
    action = coset_action(G, H)
    count = G.order // H.order
    return GSet(G, action, tuple(f"{prefix}{k}" for k in range(count)))


def disjoint_union(A: GSet, B: GSet) -> GSet:
    if A.group is not B.group:
        raise ValueError("Disjoint union needs G-sets over the same group")
    shift = A.size
    action = tuple(
        Perm(a.images + tuple(shift + i for i in b.images)) for a, b in zip(A.action, B.action)
    )
    names = list(A.names)
    taken = set(names)
    for name in B.names:
        candidate = name
        while candidate in taken:
            candidate += "'"
        taken.add(candidate)
        names.append(candidate)
    return GSet(A.group, action, tuple(names))


def restrict(A: GSet, H: Subgroup) -> GSet:
    if H.parent is not A.group:
        raise ValueError("H is not a subgroup of the acting group")
    K = H.as_group
    action = tuple(A.action[i] for i in H.parent_indices)
    return GSet(K, action, A.names)


def induce(A_prime: GSet, G: Group) -> GSet:
    """G x_H A' where H is the subgroup of G formed by the elements of A'.group."""
    K = A_prime.group
    if K.degree != G.degree or not all(G.contains(p) for p in K.elements):
        raise ValueError("The acting group of A' is not a subgroup of G")
    H = subgroup_generated(G, K.elements)
    reps = [min(coset) for coset in left_cosets(G, H)]
    rep_lookup = {}
    for k, rep in enumerate(reps):
        for h in H.members:
            rep_lookup[G.mul(rep, h)] = k

    size = A_prime.size
    action = []
    for g in range(G.order):
        images = [0] * (len(reps) * size)
        for i, rep in enumerate(reps):
            product = G.mul(g, rep)
            j = rep_lookup[product]
            h = G.mul(G.inv(reps[j]), product)
            h_local = K.index[G.elements[h]]
            for a in range(size):
                images[i * size + a] = j * size + A_prime.act(h_local, a)
        action.append(Perm(tuple(images)))
    names = tuple(f"{name}_{i}" for i in range(len(reps)) for name in A_prime.names)
    return GSet(G, tuple(action), names)


def orbits(A: GSet) -> List[Tuple[int, ...]]:
    seen = set()
    result = []
    gens = A.group.generator_indices
    for start in range(A.size):
        if start in seen:
            continue
        orbit = {start}
        stack = [start]
        while stack:
            point = stack.pop()
            for g in gens:
                image = A.act(g, point)
                if image not in orbit:
                    orbit.add(image)
                    stack.append(image)
        seen |= orbit
        result.append(tuple(sorted(orbit)))
    return result


def stabilizer(A: GSet, a: int) -> Subgroup:
    if a < 0 or a >= A.size:
        raise ValueError(f"Point {a} out of range for a G-set of size {A.size}")
    return Subgroup(A.group, frozenset(g for g in range(A.group.order) if A.act(g, a) == a))


def block_stabilizer(A: GSet, block: Iterable[int]) -> Subgroup:
    members = frozenset(block)
    return Subgroup(
        A.group,
        frozenset(
            g for g in range(A.group.order) if {A.act(g, a) for a in members} == members
        ),
    )


def fixed_points(A: GSet, H: Subgroup) -> List[int]:
    if H.parent is not A.group:
        raise ValueError("H is not a subgroup of the acting group")
    return [a for a in range(A.size) if all(A.act(h, a) == a for h in H.members)]


def orbit_type_signature(A: GSet) -> OrbitTypeSignature:
    counts: Counter = Counter()
    for orbit in orbits(A):
        counts[conjugacy_class_key(stabilizer(A, orbit[0]))] += 1
    return OrbitTypeSignature(tuple(sorted(counts.items(), key=lambda kv: (len(kv[0]), kv[0]))))


def gset_isomorphic(A: GSet, B: GSet) -> bool:
    if A.group is not B.group:
        raise ValueError("G-sets over different groups cannot be compared")
    return orbit_type_signature(A) == orbit_type_signature(B)


def orbit_stabilizers(A: GSet) -> List[Subgroup]:
    return [stabilizer(A, orbit[0]) for orbit in orbits(A)]


def isovariance_class(A: GSet) -> Optional[Subgroup]:
    stabs = orbit_stabilizers(A)
    if not stabs:
        return None
    first = stabs[0]
    if all(are_conjugate(first, other) for other in stabs[1:]):
        return first
    return None


def is_H_induced(A: GSet, H: Subgroup) -> bool:
    if H.parent is not A.group:
        raise ValueError("H is not a subgroup of the acting group")
    return all(is_subconjugate(stab, H) for stab in orbit_stabilizers(A))


def burnside_orbit_count(A: GSet) -> int:
    total = sum(
        sum(1 for a in range(A.size) if A.act(g, a) == a) for g in range(A.group.order)
    )
    count = Fraction(total, A.group.order)
    if count.denominator != 1:
        raise ValueError(f"Burnside average {count} is not an integer")
    return int(count)


def is_action_homomorphism(A: GSet) -> bool:
    G = A.group
    if not A.action[G.id_index].is_identity():
        return False
    return all(
        A.action[G.mul(g, h)] == A.action[g].compose(A.action[h])
        for g in range(G.order)
        for h in range(G.order)
    )


def gset_from_terms(G: Group, terms: Sequence[Tuple[str, Optional[Subgroup], int]]) -> GSet:
    """Disjoint union of formal terms ``(prefix, H, count)``; H None means trivial points."""
    result: Optional[GSet] = None
    for prefix, H, count in terms:
        piece = trivial_gset(G, count, prefix) if H is None else coset_gset(G, H, prefix)
        result = piece if result is None else disjoint_union(result, piece)
    if result is None:
        return trivial_gset(G, 0)
    return result


def block_orbit_count(A: GSet, blocks: Sequence[Sequence[int]]) -> int:
    """Number of orbits of A.group on the blocks of an invariant partition."""
    owner: Dict[int, int] = {}
    for k, block in enumerate(blocks):
        for a in block:
            owner[a] = k
    seen = set()
    count = 0
    for k in range(len(blocks)):
        if k in seen:
            continue
        count += 1
        stack = [k]
        seen.add(k)
        while stack:
            current = stack.pop()
            point = blocks[current][0]
            for g in A.group.generator_indices:
                image = owner[A.act(g, point)]
                if image not in seen:
                    seen.add(image)
                    stack.append(image)
    return count
