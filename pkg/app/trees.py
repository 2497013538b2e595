from __future__ import annotations

import itertools
import logging
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from sympy.utilities.iterables import multiset_partitions

from app.constants import DEFAULT_ISO_NODE_CAP, DEFAULT_TREE_GUARD
from app.errors import ScenarioParseError, check_guard
from app.gsets import GSet
from app.partitions import Partition
from app.perm_groups import Perm, Subgroup
from app.posets import ActedPoset, PosetComparison, compare_posets
from app.simplicial_homology import SimplicialComplex, fixed_point_complex

logger = logging.getLogger(__name__)

Clade = FrozenSet[int]


def _clade_key(clade: Iterable[int]) -> Tuple[int, Tuple[int, ...]]:
    ordered = tuple(sorted(clade))
    return (len(ordered), ordered)


def _compatible(a: Clade, b: Clade) -> bool:
    return a <= b or b <= a or not (a & b)


@dataclass(frozen=True)
class ReducedTree:
    """A rooted tree with leaves labelled by {0, ..., size - 1} and no unary vertices.

    Stored as its clades: the leaf set above each inner edge. Clades have between 2 and
    size - 1 leaves and form a laminar family; the corolla has no clades.
    """

    size: int
    clades: FrozenSet[Clade]

    def __post_init__(self) -> None:
        for clade in self.clades:
            if len(clade) < 2 or len(clade) > self.size - 1:
                raise ValueError(f"Clade {sorted(clade)} has the wrong size for {self.size} leaves")
            if min(clade) < 0 or max(clade) >= self.size:
                raise ValueError(f"Clade {sorted(clade)} uses leaves outside 0..{self.size - 1}")
        for a, b in itertools.combinations(self.clades, 2):
            if not _compatible(a, b):
                raise ValueError(f"Clades {sorted(a)} and {sorted(b)} overlap")

    @classmethod
    def from_clades(cls, size: int, clades: Iterable[Iterable[int]]) -> "ReducedTree":
        return cls(size, frozenset(frozenset(c) for c in clades))

    def is_corolla(self) -> bool:
        return not self.clades

    @cached_property
    def inner_edges(self) -> Tuple[Clade, ...]:
        return tuple(sorted(self.clades, key=_clade_key))

    @property
    def inner_edge_count(self) -> int:
        return len(self.clades)

    @cached_property
    def parents(self) -> Dict[Clade, Optional[Clade]]:
        """Smallest enclosing clade of each clade; None when it hangs off the root."""
        result: Dict[Clade, Optional[Clade]] = {}
        for clade in self.clades:
            above = [c for c in self.clades if clade < c]
            result[clade] = min(above, key=len) if above else None
        return result

    def children(self, clade: Optional[Clade] = None) -> List[Tuple[str, object]]:
        """Children of a vertex (the root when ``clade`` is None) as ("clade", c) or ("leaf", p)."""
        support = frozenset(range(self.size)) if clade is None else clade
        subs = [c for c, parent in self.parents.items() if parent == clade]
        covered = set().union(*subs) if subs else set()
        items: List[Tuple[str, object]] = [("clade", c) for c in subs]
        items.extend(("leaf", p) for p in support if p not in covered)
        return sorted(items, key=lambda item: min(item[1]) if item[0] == "clade" else item[1])

    def contract(self, edges: Iterable[Clade]) -> "ReducedTree":
        removed = frozenset(frozenset(e) for e in edges)
        if not removed <= self.clades:
            raise ValueError("Only inner edges of the tree can be contracted")
        return ReducedTree(self.size, self.clades - removed)

    def faces(self) -> List["ReducedTree"]:
        """Contractions of nonempty edge sets that keep at least one inner edge."""
        edges = self.inner_edges
        result = []
        for k in range(1, len(edges)):
            for removed in itertools.combinations(edges, k):
                result.append(self.contract(removed))
        return result

    def relabel(self, perm: Perm) -> "ReducedTree":
        return ReducedTree(self.size, frozenset(frozenset(perm(p) for p in c) for c in self.clades))

    def vertex_action(self, perm: Perm) -> Dict[Clade, Clade]:
        """Tree automorphism extending a leaf permutation; exists iff the clades are stable."""
        mapping = {c: frozenset(perm(p) for p in c) for c in self.clades}
        if set(mapping.values()) != set(self.clades):
            raise ValueError(f"{perm} does not extend to an automorphism of {self.format()}")
        return mapping

    def sort_key(self) -> Tuple[int, Tuple[Tuple[int, ...], ...]]:
        return (-len(self.clades), tuple(tuple(sorted(c)) for c in self.inner_edges))

    def format(
        self,
        names: Optional[Sequence[str]] = None,
        lengths: Optional[Dict[Clade, Fraction]] = None,
    ) -> str:
        label = (lambda p: names[p]) if names is not None else (lambda p: str(p + 1))

        def render(clade: Optional[Clade]) -> str:
            parts = []
            for kind, item in self.children(clade):
                parts.append(render(item) if kind == "clade" else label(item))
            text = "(" + " ".join(parts) + ")"
            if clade is not None and lengths is not None:
                text += f"@{lengths[clade]}"
            return text

        return render(None)

    def canonical_code(self, names: Optional[Sequence[str]] = None) -> str:
        return self.format(names)

    def __str__(self) -> str:
        return self.format()


_TOKEN_RE = re.compile(r"\s*(?:(\()|(\))|@([0-9]+(?:/[0-9]+)?)|([^\s()@]+))")


def _parse_literal(
    text: str, names: Sequence[str]
) -> Tuple[ReducedTree, Dict[Clade, Fraction]]:
    lookup = {name: k for k, name in enumerate(names)}
    tokens: List[Tuple[str, str, int]] = []
    position = 0
    stripped_end = len(text.rstrip())
    while position < stripped_end:
        match = _TOKEN_RE.match(text, position)
        if not match or match.end() == position:
            raise ScenarioParseError(
                f"Unexpected character {text[position]!r}", column=position + 1
            )
        column = match.start() + len(match.group(0)) - len(match.group(0).lstrip()) + 1
        if match.group(1):
            tokens.append(("open", "(", column))
        elif match.group(2):
            tokens.append(("close", ")", column))
        elif match.group(3):
            tokens.append(("length", match.group(3), column))
        else:
            tokens.append(("name", match.group(4), column))
        position = match.end()

    clades: List[Clade] = []
    lengths: Dict[Clade, Fraction] = {}
    seen: Set[int] = set()
    cursor = 0

    def node(is_root: bool) -> Clade:
        nonlocal cursor
        kind, value, column = tokens[cursor]
        if kind != "open":
            raise ScenarioParseError("Expected '('", column=column)
        cursor += 1
        leaves: Set[int] = set()
        children = 0
        while True:
            if cursor >= len(tokens):
                raise ScenarioParseError("Unbalanced parentheses", column=len(text) + 1)
            kind, value, column = tokens[cursor]
            if kind == "close":
                cursor += 1
                break
            if kind == "open":
                leaves |= node(False)
            elif kind == "name":
                if value not in lookup:
                    raise ScenarioParseError(f"Unknown leaf {value!r}", column=column)
                point = lookup[value]
                if point in seen:
                    raise ScenarioParseError(f"Leaf {value!r} appears twice", column=column)
                seen.add(point)
                leaves.add(point)
                cursor += 1
            else:
                raise ScenarioParseError("Edge length without an edge", column=column)
            children += 1
        if children < 2:
            raise ScenarioParseError("Every vertex needs at least two children", column=column)
        clade = frozenset(leaves)
        length = None
        if cursor < len(tokens) and tokens[cursor][0] == "length":
            _, value, column = tokens[cursor]
            if is_root:
                raise ScenarioParseError("The root has no inner edge to measure", column=column)
            length = Fraction(value)
            cursor += 1
        if not is_root:
            clades.append(clade)
            if length is not None:
                lengths[clade] = length
        return clade

    if not tokens:
        raise ScenarioParseError("Empty tree literal")
    node(True)
    if cursor != len(tokens):
        raise ScenarioParseError("Trailing input after the tree", column=tokens[cursor][2])
    if seen != set(range(len(names))):
        missing = [names[p] for p in range(len(names)) if p not in seen]
        raise ScenarioParseError(f"Leaves missing from the tree: {', '.join(missing)}")
    try:
        tree = ReducedTree.from_clades(len(names), clades)
    except ValueError as exc:
        raise ScenarioParseError(str(exc)) from exc
    return tree, lengths


def parse_tree_literal(text: str, names: Sequence[str]) -> ReducedTree:
    tree, _ = _parse_literal(text, names)
    return tree


@lru_cache(maxsize=None)
def _subtrees(leaves: FrozenSet[int]) -> Tuple[FrozenSet[Clade], ...]:
    """Clade families (root excluded) of every reduced tree on ``leaves``."""
    ordered = sorted(leaves)
    families: Set[FrozenSet[Clade]] = set()
    for grouping in multiset_partitions(ordered):
        if len(grouping) < 2:
            continue
        options: List[List[FrozenSet[Clade]]] = []
        for block in grouping:
            if len(block) == 1:
                options.append([frozenset()])
                continue
            clade = frozenset(block)
            options.append([inner | {clade} for inner in _subtrees(clade)])
        for combo in itertools.product(*options):
            families.add(frozenset().union(*combo))
    return tuple(families)


def enumerate_reduced_trees(A: GSet, guard: int = DEFAULT_TREE_GUARD) -> List[ReducedTree]:
    """All reduced trees with leaves the points of A, except the corolla."""
    n = A.size
    check_guard("tree leaves", guard, n)
    if n < 3:
        return []
    trees = [
        ReducedTree(n, family) for family in _subtrees(frozenset(range(n))) if family
    ]
    trees.sort(key=ReducedTree.sort_key)
    logger.debug("trees.enumerated", extra={"leaves": n, "count": len(trees)})
    return trees


def build_tree_poset(A: GSet, guard: int = DEFAULT_TREE_GUARD) -> ActedPoset:
    """Reduced A-trees, each above its contractions, with the leaf-relabelling action."""
    trees = enumerate_reduced_trees(A, guard=guard)
    lookup = {t: k for k, t in enumerate(trees)}
    ups: List[Set[int]] = [set() for _ in trees]
    for k, tree in enumerate(trees):
        for face in tree.faces():
            ups[lookup[face]].add(k)
    return ActedPoset.from_up_sets(
        trees, ups, group=A.group, act=lambda g, t: t.relabel(A.perm(g))
    )


def _invariant_clade_orbits(n: int, perms: Sequence[Perm]) -> List[FrozenSet[Clade]]:
    """Orbits of clades under perms whose members are pairwise compatible."""
    found: Dict[FrozenSet[Clade], None] = {}
    for size in range(2, n):
        for subset in itertools.combinations(range(n), size):
            clade = frozenset(subset)
            orbit = frozenset(frozenset(p(x) for x in clade) for p in perms)
            if orbit in found:
                continue
            if all(_compatible(a, b) for a, b in itertools.combinations(orbit, 2)):
                found[orbit] = None
    return sorted(found, key=lambda o: min(_clade_key(c) for c in o))


def _compatible_orbit_sets(orbits: Sequence[FrozenSet[Clade]]) -> List[Tuple[int, ...]]:
    compat = [
        [
            all(_compatible(a, b) for a in orbits[i] for b in orbits[j])
            for j in range(len(orbits))
        ]
        for i in range(len(orbits))
    ]
    result: List[Tuple[int, ...]] = []

    def extend(chosen: Tuple[int, ...], start: int) -> None:
        if chosen:
            result.append(chosen)
        for k in range(start, len(orbits)):
            if all(compat[k][j] for j in chosen):
                extend(chosen + (k,), k + 1)

    extend((), 0)
    return result


def equivariant_tree_poset(
    A: GSet, H: Subgroup, guard: int = DEFAULT_TREE_GUARD
) -> ActedPoset:
    """Trees carrying a compatible H-action, built from compatible clade orbits.

    Morphisms contract whole orbits of inner edges; the residual action is trivial.
    """
    if H.parent is not A.group:
        raise ValueError("H is not a subgroup of the acting group")
    check_guard("tree leaves", guard, A.size)
    if A.size < 3:
        return ActedPoset.from_up_sets([], [])
    perms = [A.perm(h) for h in sorted(H.members)]
    orbits = _invariant_clade_orbits(A.size, perms)
    families = _compatible_orbit_sets(orbits)
    tree_of = {
        family: ReducedTree(A.size, frozenset().union(*(orbits[k] for k in family)))
        for family in families
    }
    trees = sorted(tree_of.values(), key=ReducedTree.sort_key)
    lookup = {t: k for k, t in enumerate(trees)}
    ups: List[Set[int]] = [set() for _ in trees]
    for family, tree in tree_of.items():
        for k in range(1, len(family) + 1):
            for sub in itertools.combinations(family, k):
                ups[lookup[tree_of[sub]]].add(lookup[tree])
    logger.debug(
        "equivariant_tree_poset.built",
        extra={"leaves": A.size, "subgroup_order": H.order, "objects": len(trees)},
    )
    return ActedPoset.from_up_sets(trees, ups)


def verify_tree_fixed_points(
    A: GSet,
    H: Subgroup,
    guard: int = DEFAULT_TREE_GUARD,
    node_cap: int = DEFAULT_ISO_NODE_CAP,
) -> PosetComparison:
    fixed = build_tree_poset(A, guard=guard).fixed_subposet(H)
    direct = equivariant_tree_poset(A, H, guard=guard)
    return compare_posets(fixed, direct, node_cap=node_cap, render=lambda t: t.format(A.names))


@dataclass(frozen=True)
class LayeredTree:
    """A strict chain of partitions, finest first; layer i holds the blocks of chain[i]."""

    chain: Tuple[Partition, ...]

    def __post_init__(self) -> None:
        if not self.chain:
            raise ValueError("A layered tree needs at least one layer")
        for lower, upper in zip(self.chain, self.chain[1:]):
            if lower == upper or not upper.coarsens(lower):
                raise ValueError(f"{upper.render()} does not strictly coarsen {lower.render()}")

    @property
    def size(self) -> int:
        return self.chain[0].size

    def face(self, i: int) -> "LayeredTree":
        """Contract layer i."""
        if not 0 <= i < len(self.chain):
            raise ValueError(f"No layer {i} in a tree with {len(self.chain)} layers")
        return LayeredTree(self.chain[:i] + self.chain[i + 1 :])

    def non_unary_blocks(self, i: int) -> List[Tuple[int, ...]]:
        """Blocks of layer i that merge at least two blocks of the layer below."""
        below = self.chain[i - 1] if i > 0 else Partition.discrete(self.size)
        return [
            block
            for block in self.chain[i].blocks
            if len({below.owner[p] for p in block}) >= 2
        ]

    def is_elementary(self) -> bool:
        return all(len(self.non_unary_blocks(i)) == 1 for i in range(len(self.chain)))

    def is_equivariantly_elementary(self, A: GSet) -> bool:
        """Every layer is invariant and its merging vertices form a single orbit."""
        perms = [A.perm(g) for g in range(A.group.order)]
        for i, partition in enumerate(self.chain):
            if not partition.is_invariant(perms):
                return False
            merging = {frozenset(b) for b in self.non_unary_blocks(i)}
            first = next(iter(merging))
            orbit = {frozenset(p(x) for x in first) for p in perms}
            if orbit != merging:
                return False
        return True


def chain_to_layered(chain: Sequence[Partition]) -> LayeredTree:
    return LayeredTree(tuple(chain))


def layered_to_tree(L: LayeredTree) -> ReducedTree:
    """Collapse unary vertices and forget the layers."""
    clades = {frozenset(block) for p in L.chain for block in p.blocks if len(block) > 1}
    return ReducedTree(L.size, frozenset(clades))


def build_tree_space(A: GSet, guard: int = DEFAULT_TREE_GUARD) -> SimplicialComplex:
    """Measured trees: one vertex per clade, one simplex per tree on its clades."""
    trees = enumerate_reduced_trees(A, guard=guard)
    clades = sorted({c for t in trees for c in t.clades}, key=_clade_key)
    index = {c: k for k, c in enumerate(clades)}
    simplices = []
    for tree in trees:
        simplex = tuple(sorted(index[c] for c in tree.clades))
        if len(simplex) != tree.inner_edge_count:
            raise ValueError(f"Collapses of {tree.format()} are not pairwise distinct")
        simplices.append(simplex)
    action = []
    for g in range(A.group.order):
        perm = A.perm(g)
        action.append(Perm(tuple(index[frozenset(perm(p) for p in c)] for c in clades)))
    return SimplicialComplex.from_simplices(
        len(clades),
        simplices,
        group=A.group,
        vertex_action=action,
        vertex_labels=["{" + " ".join(A.names[p] for p in sorted(c)) + "}" for c in clades],
        closed=True,
    )


def build_equivariant_tree_space(
    A: GSet, H: Subgroup, guard: int = DEFAULT_TREE_GUARD
) -> Tuple[SimplicialComplex, Tuple[FrozenSet[Clade], ...]]:
    """Trees with an H-action: one vertex per orbit of inner edges, built orbitwise."""
    if H.parent is not A.group:
        raise ValueError("H is not a subgroup of the acting group")
    check_guard("tree leaves", guard, A.size)
    perms = [A.perm(h) for h in sorted(H.members)]
    orbits = _invariant_clade_orbits(A.size, perms) if A.size >= 3 else []
    families = _compatible_orbit_sets(orbits)
    complex_ = SimplicialComplex.from_simplices(len(orbits), families, closed=True)
    return complex_, tuple(orbits)


@dataclass(frozen=True)
class TreeSpaceComparison:
    vertices: Tuple[int, int]
    simplices: Tuple[int, int]
    matches: bool


def verify_tree_space_fixed_points(
    A: GSet, H: Subgroup, guard: int = DEFAULT_TREE_GUARD
) -> TreeSpaceComparison:
    """Compare the H-fixed part of the tree space with the orbitwise construction."""
    full = build_tree_space(A, guard=guard)
    members = [full.vertex_action[h] for h in sorted(H.members)]
    fixed, fixed_vertices = fixed_point_complex(full, members)
    trees = enumerate_reduced_trees(A, guard=guard)
    clades = sorted({c for t in trees for c in t.clades}, key=_clade_key)
    as_orbits = [frozenset(clades[v] for v in vertex) for vertex in fixed_vertices]

    direct, orbits = build_equivariant_tree_space(A, H, guard=guard)

    def simplex_sets(K: SimplicialComplex, labels: Sequence[FrozenSet[Clade]]) -> Set[FrozenSet]:
        return {frozenset(labels[v] for v in s) for level in K.faces for s in level}

    fixed_simplices = simplex_sets(fixed, as_orbits)
    direct_simplices = simplex_sets(direct, orbits)
    return TreeSpaceComparison(
        vertices=(len(as_orbits), len(orbits)),
        simplices=(len(fixed_simplices), len(direct_simplices)),
        matches=set(as_orbits) == set(orbits) and fixed_simplices == direct_simplices,
    )


@dataclass(frozen=True)
class MeasuredTree:
    """A reduced tree with inner edge lengths in (0, 1], the longest exactly 1."""

    tree: ReducedTree
    lengths: Tuple[Tuple[Clade, Fraction], ...]

    def __post_init__(self) -> None:
        if self.tree.is_corolla():
            raise ValueError("A measured tree needs an inner edge")
        keys = {c for c, _ in self.lengths}
        if keys != set(self.tree.clades) or len(self.lengths) != len(keys):
            raise ValueError("Lengths must be given for exactly the inner edges")
        for clade, length in self.lengths:
            if not 0 < length <= 1:
                raise ValueError(f"Edge length {length} outside (0, 1]")
        if max(length for _, length in self.lengths) != 1:
            raise ValueError("The longest inner edge must have length 1")

    @classmethod
    def build(cls, tree: ReducedTree, lengths: Dict[Clade, Fraction]) -> "MeasuredTree":
        ordered = tuple(
            (c, Fraction(lengths[c])) for c in tree.inner_edges if c in lengths
        )
        return cls(tree, ordered)

    @cached_property
    def length_of(self) -> Dict[Clade, Fraction]:
        return dict(self.lengths)

    def relabel(self, perm: Perm) -> "MeasuredTree":
        mapped = {frozenset(perm(p) for p in c): length for c, length in self.lengths}
        return MeasuredTree.build(self.tree.relabel(perm), mapped)

    def format(self, names: Optional[Sequence[str]] = None) -> str:
        return self.tree.format(names, self.length_of)

    def __str__(self) -> str:
        return self.format()


def parse_measured_tree_literal(text: str, names: Sequence[str]) -> MeasuredTree:
    tree, lengths = _parse_literal(text, names)
    missing = [c for c in tree.inner_edges if c not in lengths]
    if missing:
        raise ScenarioParseError(f"Inner edge {sorted(missing[0])} has no @length")
    try:
        return MeasuredTree.build(tree, lengths)
    except ValueError as exc:
        raise ScenarioParseError(str(exc)) from exc


def F_map(M: MeasuredTree) -> Tuple[List[ReducedTree], List[Fraction]]:
    """Chain of trees S(t), t in (0, 1], from the full tree down, with the measure of each."""
    breaks = sorted(set(M.length_of.values()))
    chain: List[ReducedTree] = []
    coords: List[Fraction] = []
    previous = Fraction(0)
    for cut in breaks:
        kept = frozenset(c for c, length in M.lengths if length >= cut)
        chain.append(ReducedTree(M.tree.size, kept))
        coords.append(cut - previous)
        previous = cut
    return chain, coords


def F_inverse(chain: Sequence[ReducedTree], coords: Sequence[Fraction]) -> MeasuredTree:
    """Inverse of F_map: an edge last present in the j-th tree gets the j-th partial sum."""
    if not chain or len(chain) != len(coords):
        raise ValueError("Need one positive coordinate per tree in a nonempty chain")
    if any(c <= 0 for c in coords) or sum(coords, Fraction(0)) != 1:
        raise ValueError(f"Coordinates {[str(c) for c in coords]} are not barycentric")
    for upper, lower in zip(chain, chain[1:]):
        if not (lower.clades < upper.clades):
            raise ValueError("Chain is not strictly decreasing under contraction")
    if chain[-1].is_corolla():
        raise ValueError("The last tree of the chain must keep an inner edge")
    lengths: Dict[Clade, Fraction] = {}
    total = Fraction(0)
    for j, (tree, weight) in enumerate(zip(chain, coords)):
        total += weight
        later = chain[j + 1].clades if j + 1 < len(chain) else frozenset()
        for clade in tree.clades - later:
            lengths[clade] = total
    return MeasuredTree.build(chain[0], lengths)


def measured_tree_partition_point(M: MeasuredTree) -> Tuple[List[Partition], List[Fraction]]:
    """Point of the partition complex: cut the tree at every height, finest partition first."""
    heights: Dict[Clade, Fraction] = {}
    for clade, _ in M.lengths:
        heights[clade] = sum((length for c, length in M.lengths if clade <= c), Fraction(0))
    levels = sorted(set(heights.values()))
    top = levels[-1]
    chain: List[Partition] = []
    coords: List[Fraction] = []
    previous = Fraction(0)
    for level in levels:
        alive = [c for c, h in heights.items() if h >= level]
        maximal = [c for c in alive if not any(c < other for other in alive)]
        covered = set().union(*maximal)
        singletons = [[p] for p in range(M.tree.size) if p not in covered]
        blocks = [sorted(c) for c in maximal] + singletons
        chain.append(Partition.from_blocks(blocks, M.tree.size))
        coords.append((level - previous) / top)
        previous = level
    return chain[::-1], coords[::-1]


def random_measured_tree(
    trees: Sequence[ReducedTree], rng: random.Random, max_denominator: int = 12
) -> MeasuredTree:
    tree = rng.choice(list(trees))
    lengths: Dict[Clade, Fraction] = {}
    for clade in tree.inner_edges:
        denominator = rng.randint(1, max_denominator)
        lengths[clade] = Fraction(rng.randint(1, denominator), denominator)
    lengths[rng.choice(tree.inner_edges)] = Fraction(1)
    return MeasuredTree.build(tree, lengths)
