from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
from networkx.algorithms.isomorphism import DiGraphMatcher

from app.constants import DEFAULT_CHAIN_GUARD, DEFAULT_ISO_NODE_CAP
from app.errors import SearchBudgetExceeded, check_guard
from app.perm_groups import Group, Subgroup, trivial_group

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ActedPoset:
    """A finite poset with an action by order automorphisms.

    ``up[i]`` is the principal up-set of object i (reflexive), and ``action[g][i]`` is g.i
    for every element index g of ``group``.
    """

    objects: Tuple[Hashable, ...]
    up: Tuple[FrozenSet[int], ...]
    group: Group
    action: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_relation(
        cls,
        objects: Sequence[Hashable],
        leq: Callable[[Hashable, Hashable], bool],
        group: Optional[Group] = None,
        act: Optional[Callable[[int, Hashable], Hashable]] = None,
    ) -> "ActedPoset":
        objs = tuple(objects)
        up = tuple(
            frozenset(j for j, y in enumerate(objs) if i == j or leq(x, y))
            for i, x in enumerate(objs)
        )
        return cls._with_action(objs, up, group, act)

    @classmethod
    def from_up_sets(
        cls,
        objects: Sequence[Hashable],
        up: Sequence[Iterable[int]],
        group: Optional[Group] = None,
        act: Optional[Callable[[int, Hashable], Hashable]] = None,
    ) -> "ActedPoset":
        objs = tuple(objects)
        ups = tuple(frozenset(u) | {i} for i, u in enumerate(up))
        return cls._with_action(objs, ups, group, act)

    @classmethod
    def _with_action(cls, objs, up, group, act) -> "ActedPoset":
        group = group or trivial_group()
        if act is None:
            if group.order != 1:
                raise ValueError("A non-trivial group needs an action on objects")
            action = (tuple(range(len(objs))),)
        else:
            lookup = {obj: i for i, obj in enumerate(objs)}
            rows = []
            for g in range(group.order):
                try:
                    rows.append(tuple(lookup[act(g, obj)] for obj in objs))
                except KeyError as exc:
                    raise ValueError(f"Group element {g} moves an object out of the poset") from exc
            action = tuple(rows)
        return cls(objects=objs, up=up, group=group, action=action)

    @property
    def size(self) -> int:
        return len(self.objects)

    def __len__(self) -> int:
        return len(self.objects)

    @cached_property
    def index(self) -> Dict[Hashable, int]:
        return {obj: i for i, obj in enumerate(self.objects)}

    @cached_property
    def down(self) -> Tuple[FrozenSet[int], ...]:
        downs: List[set] = [set() for _ in self.objects]
        for i, ups in enumerate(self.up):
            for j in ups:
                downs[j].add(i)
        return tuple(frozenset(d) for d in downs)

    def leq(self, i: int, j: int) -> bool:
        return j in self.up[i]

    def comparable(self, i: int, j: int) -> bool:
        return j in self.up[i] or i in self.up[j]

    def relation_count(self) -> int:
        """Number of strict comparable pairs."""
        return sum(len(u) - 1 for u in self.up)

    @cached_property
    def covers(self) -> Tuple[Tuple[int, int], ...]:
        pairs = []
        for i, ups in enumerate(self.up):
            strict = ups - {i}
            for j in sorted(strict):
                if not any(k != j and j in self.up[k] for k in strict):
                    pairs.append((i, j))
        return tuple(pairs)

    def rank(self, i: int) -> int:
        """Length of the longest chain ending at i."""
        return self.ranks[i]

    @cached_property
    def ranks(self) -> Tuple[int, ...]:
        order = sorted(range(self.size), key=lambda i: len(self.down[i]))
        ranks = [0] * self.size
        for i in order:
            below = self.down[i] - {i}
            ranks[i] = 1 + max((ranks[j] for j in below), default=-1)
        return tuple(ranks)

    def is_partial_order(self) -> bool:
        for i, ups in enumerate(self.up):
            if i not in ups:
                return False
            for j in ups:
                if j != i and i in self.up[j]:
                    return False
                if not self.up[j] <= ups:
                    return False
        return True

    def is_order_preserving_action(self) -> bool:
        for row in self.action:
            if sorted(row) != list(range(self.size)):
                return False
            for i, ups in enumerate(self.up):
                images = frozenset(row[j] for j in ups)
                if images != self.up[row[i]]:
                    return False
        return True

    def is_action_homomorphism(self) -> bool:
        G = self.group
        return all(
            self.action[G.mul(g, h)] == tuple(self.action[g][x] for x in self.action[h])
            for g in range(G.order)
            for h in range(G.order)
        )

    def is_invariant(self, indices: Iterable[int]) -> bool:
        keep = set(indices)
        return all(row[i] in keep for row in self.action for i in keep)

    def subposet(self, indices: Iterable[int], keep_action: bool = True) -> "ActedPoset":
        keep = sorted(set(indices))
        position = {old: new for new, old in enumerate(keep)}
        objects = tuple(self.objects[i] for i in keep)
        up = tuple(frozenset(position[j] for j in self.up[i] if j in position) for i in keep)
        if keep_action:
            if not self.is_invariant(keep):
                raise ValueError("Subposet is not invariant under the group action")
            action = tuple(tuple(position[row[i]] for i in keep) for row in self.action)
            return ActedPoset(objects, up, self.group, action)
        return ActedPoset(objects, up, trivial_group(), (tuple(range(len(keep))),))

    def fixed_indices(self, H: Subgroup) -> List[int]:
        if H.parent is not self.group:
            raise ValueError("H is not a subgroup of the acting group")
        members = sorted(H.members)
        return [i for i in range(self.size) if all(self.action[h][i] == i for h in members)]

    def fixed_subposet(self, H: Subgroup) -> "ActedPoset":
        return self.subposet(self.fixed_indices(H), keep_action=False)

    def restrict_action(self, H: Subgroup) -> "ActedPoset":
        if H.parent is not self.group:
            raise ValueError("H is not a subgroup of the acting group")
        action = tuple(self.action[i] for i in H.parent_indices)
        return ActedPoset(self.objects, self.up, H.as_group, action)

    def stabilizer(self, i: int) -> Subgroup:
        return Subgroup(
            self.group, frozenset(g for g in range(self.group.order) if self.action[g][i] == i)
        )

    def orbits(self) -> List[Tuple[int, ...]]:
        seen = set()
        result = []
        for i in range(self.size):
            if i in seen:
                continue
            orbit = tuple(sorted({row[i] for row in self.action}))
            seen.update(orbit)
            result.append(orbit)
        return result

    def is_connected(self) -> bool:
        if not self.objects:
            return False
        graph = nx.Graph()
        graph.add_nodes_from(range(self.size))
        graph.add_edges_from(self.covers)
        return nx.is_connected(graph)

    def hasse_digraph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        for i in range(self.size):
            graph.add_node(i, signature=(len(self.up[i]), len(self.down[i]), self.ranks[i]))
        graph.add_edges_from(self.covers)
        return graph


@dataclass(frozen=True, eq=False)
class ChainPoset(ActedPoset):
    """Nonempty strict chains of ``base`` ordered by subchain containment.

    Each object is a tuple of base indices listed bottom to top.
    """

    base: Optional[ActedPoset] = None


def enumerate_chains(
    P: ActedPoset,
    allowed: Optional[Iterable[int]] = None,
    guard: int = DEFAULT_CHAIN_GUARD,
) -> List[Tuple[int, ...]]:
    allowed_set = set(range(P.size)) if allowed is None else set(allowed)
    chains: List[Tuple[int, ...]] = []
    by_rank = sorted(allowed_set, key=lambda i: (P.ranks[i], i))

    def extend(chain: Tuple[int, ...]) -> None:
        chains.append(chain)
        check_guard("chain count", guard, len(chains))
        top = chain[-1]
        for nxt in by_rank:
            if nxt != top and nxt in P.up[top]:
                extend(chain + (nxt,))

    for start in by_rank:
        extend((start,))
    chains.sort(key=lambda c: (len(c), c))
    return chains


def chain_poset(
    P: ActedPoset,
    filter: Optional[Callable[[Hashable], bool]] = None,
    guard: int = DEFAULT_CHAIN_GUARD,
) -> ChainPoset:
    allowed = None
    if filter is not None:
        allowed = [i for i, obj in enumerate(P.objects) if filter(obj)]
    chains = enumerate_chains(P, allowed, guard)
    lookup = {chain: k for k, chain in enumerate(chains)}

    up_sets: List[set] = [set() for _ in chains]
    for k, chain in enumerate(chains):
        length = len(chain)
        for mask in range(1, 1 << length):
            sub = tuple(chain[i] for i in range(length) if mask >> i & 1)
            up_sets[lookup[sub]].add(k)

    keep_action = allowed is None or P.is_invariant(allowed)
    if keep_action:
        rank_key = P.ranks
        action = tuple(
            tuple(
                lookup[tuple(sorted((row[x] for x in chain), key=lambda v: (rank_key[v], v)))]
                for chain in chains
            )
            for row in P.action
        )
        group = P.group
    else:
        action = (tuple(range(len(chains))),)
        group = trivial_group()

    logger.debug("chain_poset.built", extra={"base_size": P.size, "chains": len(chains)})
    return ChainPoset(
        objects=tuple(chains),
        up=tuple(frozenset(u) for u in up_sets),
        group=group,
        action=action,
        base=P,
    )


def has_cone_point(P: ActedPoset) -> Optional[int]:
    n = P.size
    for i in range(n):
        if len(P.up[i]) + len(P.down[i]) - 1 == n:
            return i
    return None


def has_conical_contraction(P: ActedPoset) -> Optional[int]:
    """An object z such that every x has a join with z inside P."""
    for z in range(P.size):
        if all(_join_in(P, x, z) is not None for x in range(P.size)):
            return z
    return None


def _join_in(P: ActedPoset, x: int, z: int) -> Optional[int]:
    common = P.up[x] & P.up[z]
    for m in common:
        if common <= P.up[m]:
            return m
    return None


class _BudgetedMatcher(DiGraphMatcher):
    def __init__(self, G1, G2, node_match, node_cap: int) -> None:
        super().__init__(G1, G2, node_match=node_match)
        self.node_cap = node_cap
        self.visited = 0

    def semantic_feasibility(self, G1_node, G2_node) -> bool:
        self.visited += 1
        if self.visited > self.node_cap:
            raise SearchBudgetExceeded(self.node_cap)
        return super().semantic_feasibility(G1_node, G2_node)


def poset_isomorphic(
    P: ActedPoset,
    Q: ActedPoset,
    node_cap: int = DEFAULT_ISO_NODE_CAP,
    hint: Optional[Dict[int, int]] = None,
) -> Optional[Dict[int, int]]:
    """An order isomorphism P -> Q as an index map, or None.

    A ``hint`` (for instance matching canonical forms) is returned when it verifies;
    otherwise the VF2 search runs on the Hasse diagrams.
    """
    if P.size != Q.size or P.relation_count() != Q.relation_count():
        return None
    if P.size == 0:
        return {}
    if hint is not None and is_order_isomorphism(P, Q, hint):
        return dict(sorted(hint.items()))
    p_graph = P.hasse_digraph()
    q_graph = Q.hasse_digraph()
    p_sigs = sorted(d["signature"] for _, d in p_graph.nodes(data=True))
    q_sigs = sorted(d["signature"] for _, d in q_graph.nodes(data=True))
    if p_sigs != q_sigs:
        return None

    matcher = _BudgetedMatcher(
        p_graph,
        q_graph,
        node_match=lambda a, b: a["signature"] == b["signature"],
        node_cap=node_cap,
    )
    mapping = next(matcher.isomorphisms_iter(), None)
    logger.debug(
        "poset.isomorphism.search",
        extra={"size": P.size, "found": mapping is not None, "visited": matcher.visited},
    )
    if mapping is None:
        return None
    return dict(sorted(mapping.items()))


def is_order_isomorphism(P: ActedPoset, Q: ActedPoset, mapping: Dict[int, int]) -> bool:
    if sorted(mapping) != list(range(P.size)) or sorted(mapping.values()) != list(range(Q.size)):
        return False
    return all(
        frozenset(mapping[j] for j in P.up[i]) == Q.up[mapping[i]] for i in range(P.size)
    )


def canonical_hint(P: ActedPoset, Q: ActedPoset) -> Optional[Dict[int, int]]:
    """Index map matching equal objects, when both posets hold the same object set."""
    if set(P.objects) != set(Q.objects):
        return None
    return {i: Q.index[obj] for i, obj in enumerate(P.objects)}


@dataclass(frozen=True)
class PosetComparison:
    """Outcome of matching two independently built posets."""

    left_size: int
    right_size: int
    left_relations: int
    right_relations: int
    mapping: Optional[Dict[int, int]]
    method: str
    certificate: Tuple[Tuple[str, str], ...] = ()

    @property
    def holds(self) -> bool:
        return self.mapping is not None

    def as_payload(self) -> Dict[str, object]:
        payload: Dict[str, object] = {
            "objects": [self.left_size, self.right_size],
            "relations": [self.left_relations, self.right_relations],
            "method": self.method,
            "isomorphic": self.holds,
        }
        if self.mapping is not None:
            payload["certificate"] = [list(pair) for pair in self.certificate]
        return payload


def compare_posets(
    left: ActedPoset,
    right: ActedPoset,
    node_cap: int = DEFAULT_ISO_NODE_CAP,
    render: Callable[[Hashable], str] = str,
) -> PosetComparison:
    hint = canonical_hint(left, right)
    if hint is not None and is_order_isomorphism(left, right, hint):
        mapping: Optional[Dict[int, int]] = dict(sorted(hint.items()))
        method = "canonical"
    else:
        mapping = poset_isomorphic(left, right, node_cap=node_cap)
        method = "search"
    logger.debug(
        "poset.isomorphism.compared",
        extra={
            "left": left.size,
            "right": right.size,
            "method": method,
            "found": mapping is not None,
        },
    )
    certificate = tuple(
        (render(left.objects[i]), render(right.objects[j]))
        for i, j in sorted((mapping or {}).items())
    )
    return PosetComparison(
        left_size=left.size,
        right_size=right.size,
        left_relations=left.relation_count(),
        right_relations=right.relation_count(),
        mapping=mapping,
        method=method,
        certificate=certificate,
    )
