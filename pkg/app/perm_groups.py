from __future__ import annotations

import itertools
import logging
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from app.constants import DEFAULT_SUBGROUP_GUARD, DEFAULT_WEYL_GUARD, MUL_TABLE_MAX_ORDER
from app.errors import ScenarioParseError, check_guard

if TYPE_CHECKING:
    from app.posets import ActedPoset

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Perm:
    """A permutation of {0, ..., degree - 1} stored by its images."""

    images: Tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"Not a bijection on {len(self.images)} points: {self.images}")

    @classmethod
    def identity(cls, degree: int) -> "Perm":
        return cls(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, degree: int, cycles: Iterable[Sequence[int]]) -> "Perm":
        images = list(range(degree))
        seen = set()
        for cycle in cycles:
            for point in cycle:
                if point < 0 or point >= degree:
                    raise ValueError(f"Point {point + 1} out of range for degree {degree}")
                if point in seen:
                    raise ValueError(f"Point {point + 1} repeated in cycle notation")
                seen.add(point)
            for i, point in enumerate(cycle):
                images[point] = cycle[(i + 1) % len(cycle)]
        return cls(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, point: int) -> int:
        return self.images[point]

    def compose(self, other: "Perm") -> "Perm":
        """self o other: apply other first."""
        if other.degree != self.degree:
            raise ValueError(f"Degree mismatch: {self.degree} vs {other.degree}")
        return Perm(tuple(self.images[i] for i in other.images))

    def __mul__(self, other: "Perm") -> "Perm":
        return self.compose(other)

    def inverse(self) -> "Perm":
        inv = [0] * self.degree
        for i, image in enumerate(self.images):
            inv[image] = i
        return Perm(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == image for i, image in enumerate(self.images))

    def cycles(self) -> List[Tuple[int, ...]]:
        seen = set()
        result = []
        for start in range(self.degree):
            if start in seen or self.images[start] == start:
                continue
            cycle = [start]
            seen.add(start)
            current = self.images[start]
            while current != start:
                cycle.append(current)
                seen.add(current)
                current = self.images[current]
            result.append(tuple(cycle))
        return result

    def cycle_type(self) -> Tuple[int, ...]:
        lengths = [len(c) for c in self.cycles()]
        lengths.extend([1] * (self.degree - sum(lengths)))
        return tuple(sorted(lengths, reverse=True))

    def sign(self) -> int:
        odd = sum(len(c) - 1 for c in self.cycles()) % 2
        return -1 if odd else 1

    def order(self) -> int:
        result = 1
        for cycle in self.cycles():
            length = len(cycle)
            a, b = result, length
            while b:
                a, b = b, a % b
            result = result * length // a
        return result

    def __str__(self) -> str:
        cycles = self.cycles()
        if not cycles:
            return "()"
        return "".join("(" + " ".join(str(p + 1) for p in c) + ")" for c in cycles)


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, degree: Optional[int] = None) -> Tuple[List[Perm], int]:
    """Parse ``"(1 2);(1 2 3)"`` into generators. Points are 1-based.

    Returns the generators and the degree used (the largest point mentioned unless given).
    """
    raw_gens: List[List[List[int]]] = []
    max_point = 0
    offset = 0
    for chunk in text.split(";"):
        stripped = chunk.strip()
        column = offset + (len(chunk) - len(chunk.lstrip())) + 1
        offset += len(chunk) + 1
        if not stripped:
            if text.strip():
                raise ScenarioParseError("Empty generator", column=column)
            continue
        position = 0
        cycles: List[List[int]] = []
        while position < len(stripped):
            if stripped[position].isspace():
                position += 1
                continue
            match = _CYCLE_RE.match(stripped, position)
            if not match:
                raise ScenarioParseError(
                    f"Expected '(' in cycle notation near {stripped[position:]!r}",
                    column=column + position,
                )
            tokens = match.group(1).replace(",", " ").split()
            cycle = []
            for token in tokens:
                if not token.isdigit() or int(token) < 1:
                    raise ScenarioParseError(
                        f"Invalid point {token!r}; points are positive integers",
                        column=column + position,
                    )
                cycle.append(int(token) - 1)
            if len(set(cycle)) != len(cycle):
                raise ScenarioParseError(
                    f"Repeated point in cycle {match.group(0)}", column=column + position
                )
            if cycle:
                max_point = max(max_point, max(cycle) + 1)
                cycles.append(cycle)
            position = match.end()
        raw_gens.append(cycles)

    if degree is None:
        degree = max(max_point, 1)
    elif max_point > degree:
        raise ScenarioParseError(f"Point {max_point} exceeds degree {degree}")

    gens = []
    for cycles in raw_gens:
        try:
            gens.append(Perm.from_cycles(degree, cycles))
        except ValueError as exc:
            raise ScenarioParseError(str(exc)) from exc
    return gens, degree


@dataclass(frozen=True, eq=False)
class Group:
    degree: int
    elements: Tuple[Perm, ...]
    generators: Tuple[Perm, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def id_index(self) -> int:
        return 0

    @cached_property
    def index(self) -> Dict[Perm, int]:
        return {perm: i for i, perm in enumerate(self.elements)}

    @cached_property
    def inverse_indices(self) -> Tuple[int, ...]:
        return tuple(self.index[p.inverse()] for p in self.elements)

    @cached_property
    def generator_indices(self) -> Tuple[int, ...]:
        return tuple(self.index[g] for g in self.generators)

    @cached_property
    def mul_table(self) -> Optional[Tuple[Tuple[int, ...], ...]]:
        """Row i, column j holds the index of elements[i] composed with elements[j]."""
        if self.order > MUL_TABLE_MAX_ORDER:
            return None
        return tuple(
            tuple(self.index[a.compose(b)] for b in self.elements) for a in self.elements
        )

    def mul(self, i: int, j: int) -> int:
        table = self.mul_table
        if table is not None:
            return table[i][j]
        return self.index[self.elements[i].compose(self.elements[j])]

    def inv(self, i: int) -> int:
        return self.inverse_indices[i]

    def conjugate(self, g: int, x: int) -> int:
        """g x g^-1."""
        return self.mul(self.mul(g, x), self.inv(g))

    def contains(self, perm: Perm) -> bool:
        return perm in self.index

    @cached_property
    def conjugacy_classes(self) -> Tuple[Tuple[int, ...], ...]:
        assigned = [False] * self.order
        classes = []
        for x in range(self.order):
            if assigned[x]:
                continue
            members = sorted({self.conjugate(g, x) for g in range(self.order)})
            for m in members:
                assigned[m] = True
            classes.append(tuple(members))
        return tuple(classes)

    @cached_property
    def class_of(self) -> Tuple[int, ...]:
        lookup = [0] * self.order
        for k, members in enumerate(self.conjugacy_classes):
            for m in members:
                lookup[m] = k
        return tuple(lookup)

    def is_abelian(self) -> bool:
        gens = self.generator_indices
        return all(self.mul(a, b) == self.mul(b, a) for a in gens for b in gens)

    def describe(self) -> str:
        if not self.generators:
            return f"trivial group on {self.degree} points"
        return ";".join(str(g) for g in self.generators)


def generate_group(gens: Sequence[Perm], degree: int) -> Group:
    for g in gens:
        if g.degree != degree:
            raise ValueError(f"Generator {g} has degree {g.degree}, expected {degree}")
    ordered = tuple(sorted({g for g in gens if not g.is_identity()}))
    identity = Perm.identity(degree)
    elements = [identity]
    seen = {identity}
    layer = [identity]
    # breadth-first by word length, each layer in lexicographic order of images
    while layer:
        found = set()
        for current in layer:
            for s in ordered:
                product = current.compose(s)
                if product not in seen:
                    seen.add(product)
                    found.add(product)
        layer = sorted(found, key=lambda p: p.images)
        elements.extend(layer)
    return Group(degree=degree, elements=tuple(elements), generators=ordered)


def symmetric_group(n: int) -> Group:
    if n <= 1:
        return trivial_group(max(n, 1))
    gens = [Perm.from_cycles(n, [(0, 1)])]
    if n > 2:
        gens.append(Perm.from_cycles(n, [tuple(range(n))]))
    return generate_group(gens, n)


def cyclic_group(n: int) -> Group:
    if n <= 1:
        return trivial_group(1)
    return generate_group([Perm.from_cycles(n, [tuple(range(n))])], n)


def trivial_group(degree: int = 1) -> Group:
    return generate_group([], degree)


FANO_LINES = frozenset(frozenset({i, (i + 1) % 7, (i + 3) % 7}) for i in range(7))


def fano_collineation_group() -> Group:
    """Collineations of the Fano plane: PSL(2, 7) acting on the seven points."""
    gens = []
    for images in itertools.permutations(range(7)):
        moved = frozenset(frozenset(images[p] for p in line) for line in FANO_LINES)
        if moved == FANO_LINES and images != tuple(range(7)):
            gens.append(Perm(images))
    return generate_group(gens, 7)


@dataclass(frozen=True)
class Subgroup:
    parent: Group = field(compare=False, repr=False)
    members: FrozenSet[int]

    @property
    def order(self) -> int:
        return len(self.members)

    @property
    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        return (self.order, tuple(sorted(self.members)))

    def perms(self) -> List[Perm]:
        return [self.parent.elements[i] for i in sorted(self.members)]

    def contains(self, index: int) -> bool:
        return index in self.members

    def is_trivial(self) -> bool:
        return self.members == frozenset({self.parent.id_index})

    def is_whole(self) -> bool:
        return self.order == self.parent.order

    def is_subgroup_of(self, other: "Subgroup") -> bool:
        _same_parent(self, other)
        return self.members <= other.members

    @cached_property
    def as_group(self) -> Group:
        """The subgroup as a standalone permutation group on the parent's points."""
        return generate_group(self.perms(), self.parent.degree)

    @cached_property
    def parent_indices(self) -> Tuple[int, ...]:
        """Parent element index for each element of ``as_group``, in its order."""
        return tuple(self.parent.index[p] for p in self.as_group.elements)

    def label(self) -> str:
        if self.is_trivial():
            return "e"
        if self.is_whole():
            return "G"
        gens = minimal_generators(self)
        return "<" + ",".join(str(self.parent.elements[g]) for g in gens) + ">"


def _same_parent(*subgroups: Subgroup) -> None:
    parent = subgroups[0].parent
    for sub in subgroups[1:]:
        if sub.parent is not parent:
            raise ValueError("Subgroups belong to different parent groups")


def _generated(G: Group, gen_indices: Iterable[int]) -> FrozenSet[int]:
    gens = sorted(set(gen_indices))
    members = {G.id_index}
    queue = deque([G.id_index])
    while queue:
        current = queue.popleft()
        for s in gens:
            product = G.mul(current, s)
            if product not in members:
                members.add(product)
                queue.append(product)
    return frozenset(members)


def subgroup_generated(G: Group, gens: Iterable[int | Perm]) -> Subgroup:
    indices = []
    for g in gens:
        if isinstance(g, Perm):
            if g not in G.index:
                raise ValueError(f"{g} is not an element of the group")
            indices.append(G.index[g])
        else:
            indices.append(g)
    return Subgroup(G, _generated(G, indices))


def whole_group(G: Group) -> Subgroup:
    return Subgroup(G, frozenset(range(G.order)))


def trivial_subgroup(G: Group) -> Subgroup:
    return Subgroup(G, frozenset({G.id_index}))


def minimal_generators(H: Subgroup) -> List[int]:
    """A greedy generating set, adding elements in index order."""
    gens: List[int] = []
    current = frozenset({H.parent.id_index})
    for x in sorted(H.members):
        if x not in current:
            gens.append(x)
            current = _generated(H.parent, gens)
            if current == H.members:
                break
    return gens


def is_subgroup(G: Group, members: Iterable[int]) -> bool:
    member_set = frozenset(members)
    if G.id_index not in member_set:
        return False
    return all(G.mul(a, b) in member_set for a in member_set for b in member_set)


def all_subgroups(G: Group, guard: int = DEFAULT_SUBGROUP_GUARD) -> List[Subgroup]:
    check_guard("subgroup enumeration", guard, G.order)
    cyclic: Dict[FrozenSet[int], int] = {}
    for x in range(G.order):
        cyclic.setdefault(_generated(G, [x]), x)

    found: Dict[FrozenSet[int], Tuple[int, ...]] = {}
    frontier: List[Tuple[FrozenSet[int], Tuple[int, ...]]] = []
    for members, x in cyclic.items():
        gens = () if members == frozenset({G.id_index}) else (x,)
        if members not in found:
            found[members] = gens
            frontier.append((members, gens))

    while frontier:
        next_frontier = []
        for members, gens in frontier:
            for cyc_members, x in cyclic.items():
                if cyc_members <= members:
                    continue
                joined_gens = gens + (x,)
                joined = _generated(G, joined_gens)
                if joined not in found:
                    found[joined] = joined_gens
                    next_frontier.append((joined, joined_gens))
        frontier = next_frontier

    result = sorted((Subgroup(G, m) for m in found), key=lambda s: s.sort_key)
    logger.debug("subgroups.enumerated", extra={"group_order": G.order, "count": len(result)})
    return result


def conjugate_subgroup(H: Subgroup, g: int) -> Subgroup:
    G = H.parent
    return Subgroup(G, frozenset(G.conjugate(g, h) for h in H.members))


def normalizer(G: Group, H: Subgroup) -> Subgroup:
    if H.parent is not G:
        raise ValueError("H is not a subgroup of G")
    gens = minimal_generators(H)
    members = frozenset(
        g for g in range(G.order) if all(G.conjugate(g, h) in H.members for h in gens)
    )
    return Subgroup(G, members)


def left_cosets(G: Group, H: Subgroup, within: Optional[Subgroup] = None) -> List[FrozenSet[int]]:
    """Left cosets xH for x in ``within`` (default G), ordered by smallest member."""
    pool = sorted(within.members) if within is not None else range(G.order)
    cosets: List[FrozenSet[int]] = []
    covered = set()
    for x in pool:
        if x in covered:
            continue
        coset = frozenset(G.mul(x, h) for h in H.members)
        covered |= coset
        cosets.append(coset)
    return cosets


def coset_action(G: Group, H: Subgroup, within: Optional[Subgroup] = None) -> Tuple[Perm, ...]:
    """Left translation action on the cosets of H, one Perm per element of ``within`` (or G)."""
    cosets = left_cosets(G, H, within)
    lookup = {}
    for k, coset in enumerate(cosets):
        for x in coset:
            lookup[x] = k
    acting = sorted(within.members) if within is not None else range(G.order)
    images = []
    for g in acting:
        images.append(Perm(tuple(lookup[G.mul(g, min(coset))] for coset in cosets)))
    return tuple(images)


def weyl_group(G: Group, H: Subgroup) -> Group:
    N = normalizer(G, H)
    action = coset_action(G, H, within=N)
    degree = action[0].degree if action else 1
    W = generate_group(list(set(action)), degree)
    logger.debug(
        "weyl_group.computed",
        extra={"normalizer_order": N.order, "subgroup_order": H.order, "weyl_order": W.order},
    )
    return W


def derived_subgroup(H: Subgroup) -> Subgroup:
    G = H.parent
    commutators = set()
    members = sorted(H.members)
    for a in members:
        for b in members:
            commutators.add(G.mul(G.mul(a, b), G.mul(G.inv(a), G.inv(b))))
    return Subgroup(G, _generated(G, commutators))


def is_solvable(G: Group) -> bool:
    current = whole_group(G)
    while not current.is_trivial():
        derived = derived_subgroup(current)
        if derived.members == current.members:
            return False
        current = derived
    return True


def is_normal(H: Subgroup, G: Group) -> bool:
    if H.parent is not G:
        raise ValueError("H is not a subgroup of G")
    return all(G.conjugate(g, h) in H.members for g in G.generator_indices for h in H.members)


def are_conjugate(H: Subgroup, K: Subgroup) -> bool:
    _same_parent(H, K)
    if H.order != K.order:
        return False
    G = H.parent
    return any(conjugate_subgroup(H, g).members == K.members for g in range(G.order))


def is_subconjugate(H: Subgroup, K: Subgroup) -> bool:
    _same_parent(H, K)
    if K.order % H.order:
        return False
    G = H.parent
    gens = minimal_generators(H)
    return any(all(G.conjugate(g, h) in K.members for h in gens) for g in range(G.order))


def conjugacy_class_key(H: Subgroup) -> Tuple[int, ...]:
    """Smallest sorted member tuple over all conjugates; equal iff conjugate."""
    G = H.parent
    return min(tuple(sorted(conjugate_subgroup(H, g).members)) for g in range(G.order))


def between_subgroup_poset(G: Group, H: Subgroup) -> "ActedPoset":
    from app.posets import ActedPoset

    if H.parent is not G:
        raise ValueError("H is not a subgroup of G")
    between = [
        K
        for K in all_subgroups(G)
        if H.members < K.members and K.order < G.order
    ]
    return ActedPoset.from_relation(
        between, lambda a, b: a.members <= b.members, group=trivial_group()
    )


def symmetric_normalizer_order(
    perms: Iterable[Perm], degree: int, guard: int = DEFAULT_WEYL_GUARD
) -> int:
    """|N_{Sigma_degree}(G)| for G given by generating perms, by scanning all of Sigma_degree."""
    check_guard("normalizer scan degree", guard, degree)
    gens = [p for p in perms if not p.is_identity()]
    members = set(generate_group(gens, degree).elements)
    count = 0
    for images in itertools.permutations(range(degree)):
        sigma = Perm(images)
        sigma_inv = sigma.inverse()
        if all(sigma.compose(g).compose(sigma_inv) in members for g in gens):
            count += 1
    return count
