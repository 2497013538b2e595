from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from app.constants import (
    DEFAULT_CHAIN_GUARD,
    DEFAULT_MAP_RANK_FACES,
    DEFAULT_PARTITION_GUARD,
    DEFAULT_SIMPLEX_GUARD,
    DEFAULT_SUBGROUP_GUARD,
    DEFAULT_TREE_GUARD,
)
from app.gsets import GSet
from app.partitions import build_partition_poset
from app.perm_groups import all_subgroups
from app.posets import ActedPoset, ChainPoset, chain_poset, has_cone_point
from app.simplicial_homology import (
    SimplicialComplex,
    induced_map_rank,
    order_complex,
    reduced_homology,
)
from app.trees import LayeredTree, build_tree_poset, layered_to_tree

logger = logging.getLogger(__name__)

VARIANCES = ("over", "under")


@dataclass(frozen=True, eq=False)
class PosetMap:
    """A monotone map between acted posets over the same group, stored as an index table."""

    source: ActedPoset
    target: ActedPoset
    object_map: Tuple[int, ...]
    name: str = "map"

    def __post_init__(self) -> None:
        if len(self.object_map) != self.source.size:
            raise ValueError("The object map must cover every source object")
        if self.source.group is not self.target.group:
            raise ValueError("Source and target must carry the same acting group")

    def __call__(self, i: int) -> int:
        return self.object_map[i]

    def is_monotone(self) -> bool:
        return all(
            self.object_map[j] in self.target.up[self.object_map[i]]
            for i in range(self.source.size)
            for j in self.source.up[i]
        )

    def is_equivariant(self) -> bool:
        return all(
            self.object_map[src_row[i]] == tgt_row[self.object_map[i]]
            for src_row, tgt_row in zip(self.source.action, self.target.action)
            for i in range(self.source.size)
        )

    @cached_property
    def preimages(self) -> Tuple[Tuple[int, ...], ...]:
        buckets: List[List[int]] = [[] for _ in range(self.target.size)]
        for i, t in enumerate(self.object_map):
            buckets[t].append(i)
        return tuple(tuple(b) for b in buckets)

    def fibre(self, d: int, variance: str = "over") -> List[int]:
        """Source objects c with F(c) <= d ("over") or d <= F(c) ("under")."""
        if variance == "over":
            reach = self.target.down[d]
        elif variance == "under":
            reach = self.target.up[d]
        else:
            raise ValueError(f"Unknown variance {variance!r}; expected one of {VARIANCES}")
        return sorted(i for t in reach for i in self.preimages[t])


def identity_map(P: ActedPoset) -> PosetMap:
    return PosetMap(P, P, tuple(range(P.size)), name="identity")


def last_vertex_map(P: ActedPoset, guard: int = DEFAULT_CHAIN_GUARD) -> PosetMap:
    """Chains of P to P, sending a chain to its top element."""
    chains = chain_poset(P, guard=guard)
    return PosetMap(chains, P, tuple(chain[-1] for chain in chains.objects), name="last-vertex")


def phi_map(
    A: GSet,
    partition_guard: int = DEFAULT_PARTITION_GUARD,
    tree_guard: int = DEFAULT_TREE_GUARD,
    chain_guard: int = DEFAULT_CHAIN_GUARD,
) -> PosetMap:
    """Chains of partitions of A to reduced A-trees (collapse unary vertices, forget layers)."""
    P = build_partition_poset(A, guard=partition_guard)
    chains = chain_poset(P, guard=chain_guard)
    T = build_tree_poset(A, guard=tree_guard)
    images = []
    for chain in chains.objects:
        tree = layered_to_tree(LayeredTree(tuple(P.objects[i] for i in chain)))
        images.append(T.index[tree])
    return PosetMap(chains, T, tuple(images), name="phi")


def _with_stabilizer_action(Fm: PosetMap, d: int, indices: Sequence[int]) -> ActedPoset:
    stab = Fm.target.stabilizer(d)
    sub = Fm.source.subposet(indices, keep_action=False)
    position = {old: new for new, old in enumerate(indices)}
    action = tuple(
        tuple(position[Fm.source.action[g][i]] for i in indices) for g in stab.parent_indices
    )
    return ActedPoset(sub.objects, sub.up, stab.as_group, action)


def undercategory(Fm: PosetMap, d: int) -> ActedPoset:
    """d | F as a subposet of the source, acted on by the stabilizer of d."""
    return _with_stabilizer_action(Fm, d, Fm.fibre(d, "under"))


def overcategory(Fm: PosetMap, d: int) -> ActedPoset:
    """F | d as a subposet of the source, acted on by the stabilizer of d."""
    return _with_stabilizer_action(Fm, d, Fm.fibre(d, "over"))


@dataclass(frozen=True)
class FibreResult:
    target: int
    subgroup: str
    subgroup_order: int
    size: int
    certificate: str
    passed: bool

    def as_payload(self) -> Dict[str, object]:
        return {
            "target": self.target,
            "subgroup": self.subgroup,
            "subgroup_order": self.subgroup_order,
            "size": self.size,
            "certificate": self.certificate,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class FibreReport:
    map_name: str
    variance: str
    property_name: str
    fibres: Tuple[FibreResult, ...]
    equivariance_samples: int
    equivariance_ok: bool

    @property
    def passed(self) -> bool:
        return self.equivariance_ok and all(f.passed for f in self.fibres)

    def certificate_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for f in self.fibres:
            counts[f.certificate] = counts.get(f.certificate, 0) + 1
        return dict(sorted(counts.items()))

    def as_payload(self) -> Dict[str, object]:
        return {
            "map": self.map_name,
            "variance": self.variance,
            "property": self.property_name,
            "fibres_checked": len(self.fibres),
            "certificates": self.certificate_counts(),
            "failures": [f.as_payload() for f in self.fibres if not f.passed],
            "equivariance_samples": self.equivariance_samples,
            "equivariance_ok": self.equivariance_ok,
        }


def _is_down_closed(chains: Sequence[Tuple[int, ...]]) -> bool:
    present = set(chains)
    return all(
        chain[:k] + chain[k + 1 :] in present
        for chain in chains
        if len(chain) > 1
        for k in range(len(chain))
    )


def certify_contractible(
    P: ActedPoset, indices: Sequence[int], simplex_guard: int = DEFAULT_SIMPLEX_GUARD
) -> str:
    """Strongest available certificate for the subposet on ``indices``; "" when it fails."""
    if not indices:
        return ""
    sub = P.subposet(indices, keep_action=False)
    if has_cone_point(sub) is not None:
        return "cone-point"
    if isinstance(P, ChainPoset) and P.base is not None:
        chains = [P.objects[i] for i in indices]
        if _is_down_closed(chains):
            K = SimplicialComplex.from_simplices(P.base.size, chains, closed=True)
            if K.cone_apex() is not None:
                return "simplicial-cone"
    if (
        sub.is_connected()
        and reduced_homology(order_complex(sub, guard=simplex_guard)).is_acyclic()
    ):
        return "acyclic-connected"
    return ""


def _scan_fibres(
    Fm: PosetMap,
    variance: str,
    property_name: str,
    subgroup_guard: int,
    simplex_guard: int,
) -> FibreReport:
    G = Fm.target.group
    subgroups = all_subgroups(G, guard=subgroup_guard)
    results: List[FibreResult] = []
    samples = 0
    equivariance_ok = True
    for orbit in Fm.target.orbits():
        d = orbit[0]
        fibre = Fm.fibre(d, variance)
        for g in G.generator_indices:
            moved = sorted(Fm.source.action[g][i] for i in fibre)
            samples += 1
            if moved != Fm.fibre(Fm.target.action[g][d], variance):
                equivariance_ok = False
        stab = Fm.target.stabilizer(d)
        for H in subgroups:
            if not H.members <= stab.members:
                continue
            members = sorted(H.members)
            fixed = [i for i in fibre if all(Fm.source.action[h][i] == i for h in members)]
            certificate = certify_contractible(Fm.source, fixed, simplex_guard=simplex_guard)
            results.append(
                FibreResult(
                    target=d,
                    subgroup=H.label(),
                    subgroup_order=H.order,
                    size=len(fixed),
                    certificate=certificate or ("empty" if not fixed else "none"),
                    passed=bool(certificate),
                )
            )
    report = FibreReport(
        map_name=Fm.name,
        variance=variance,
        property_name=property_name,
        fibres=tuple(results),
        equivariance_samples=samples,
        equivariance_ok=equivariance_ok,
    )
    logger.info(
        "quillen.fibres.scanned",
        extra={
            "map": Fm.name,
            "variance": variance,
            "fibres": len(results),
            "passed": report.passed,
        },
    )
    return report


def check_G_finality(
    Fm: PosetMap,
    variance: str = "over",
    subgroup_guard: int = DEFAULT_SUBGROUP_GUARD,
    simplex_guard: int = DEFAULT_SIMPLEX_GUARD,
) -> FibreReport:
    """Every fixed fibre over every target orbit representative is contractible.

    With chains ordered by containment and trees above their contractions, the fibres
    d | F of the finality condition are the stored-order "over" fibres.
    """
    return _scan_fibres(Fm, variance, "G-homotopy final", subgroup_guard, simplex_guard)


def check_G_initiality(
    Fm: PosetMap,
    variance: str = "over",
    subgroup_guard: int = DEFAULT_SUBGROUP_GUARD,
    simplex_guard: int = DEFAULT_SIMPLEX_GUARD,
) -> FibreReport:
    return _scan_fibres(Fm, variance, "G-homotopy initial", subgroup_guard, simplex_guard)


def fixed_homology(
    P: ActedPoset, indices: Sequence[int], simplex_guard: int = DEFAULT_SIMPLEX_GUARD
):
    """Reduced homology of the realization of the subposet on ``indices``.

    For a down-closed family of chains the chain complex itself is used; the order complex
    of the chain poset is its barycentric subdivision.
    """
    if isinstance(P, ChainPoset) and P.base is not None:
        chains = [P.objects[i] for i in indices]
        if _is_down_closed(chains):
            return reduced_homology(
                SimplicialComplex.from_simplices(
                    P.base.size, chains, closed=True, guard=simplex_guard
                )
            )
    sub = P.subposet(indices, keep_action=False)
    return reduced_homology(order_complex(sub, guard=simplex_guard))


@dataclass(frozen=True)
class RealizationEntry:
    subgroup: str
    subgroup_order: int
    source_betti: Dict[int, int]
    target_betti: Dict[int, int]
    map_ranks: Optional[Dict[int, int]]

    @property
    def ranks_checked(self) -> bool:
        return self.map_ranks is not None

    @property
    def passed(self) -> bool:
        if self.source_betti != self.target_betti:
            return False
        if self.map_ranks is None:
            return True
        return all(
            self.map_ranks.get(d, 0) == b for d, b in self.source_betti.items() if d >= 0
        )

    def as_payload(self) -> Dict[str, object]:
        return {
            "subgroup": self.subgroup,
            "subgroup_order": self.subgroup_order,
            "source_betti": {str(d): b for d, b in self.source_betti.items()},
            "target_betti": {str(d): b for d, b in self.target_betti.items()},
            "map_ranks": (
                None
                if self.map_ranks is None
                else {str(d): r for d, r in sorted(self.map_ranks.items())}
            ),
            "ranks_checked": self.ranks_checked,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class RealizationReport:
    map_name: str
    entries: Tuple[RealizationEntry, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def unranked(self) -> Tuple[str, ...]:
        """Subgroups whose Betti numbers agree but whose induced ranks were not computed."""
        return tuple(
            e.subgroup
            for e in self.entries
            if not e.ranks_checked and e.source_betti == e.target_betti
        )

    def as_payload(self) -> Dict[str, object]:
        return {"map": self.map_name, "subgroups": [e.as_payload() for e in self.entries]}


def _induced_ranks(
    Fm: PosetMap,
    source_fixed: Sequence[int],
    target_fixed: Sequence[int],
    degrees: Sequence[int],
    face_limit: int,
    simplex_guard: int,
) -> Optional[Dict[int, int]]:
    degrees = [d for d in degrees if d >= 0]
    if not degrees or not source_fixed:
        return {}
    source_sub = Fm.source.subposet(source_fixed, keep_action=False)
    target_sub = Fm.target.subposet(target_fixed, keep_action=False)
    K = order_complex(source_sub, guard=simplex_guard)
    L = order_complex(target_sub, guard=simplex_guard)
    if any(max(K.face_count(d), L.face_count(d)) > face_limit for d in degrees):
        return None
    position = {old: new for new, old in enumerate(target_fixed)}
    vertex_map = [position[Fm.object_map[i]] for i in source_fixed]
    return {d: induced_map_rank(K, L, vertex_map, d) for d in degrees}


def check_realization_equivalence(
    Fm: PosetMap,
    subgroup_guard: int = DEFAULT_SUBGROUP_GUARD,
    simplex_guard: int = DEFAULT_SIMPLEX_GUARD,
    face_limit: int = DEFAULT_MAP_RANK_FACES,
) -> RealizationReport:
    """For every subgroup H: equal Betti numbers of the H-fixed source and target.

    Where the order complexes are small enough, the induced map must also have full rank
    on rational homology in every nonzero degree; larger cases compare Betti numbers only and
    are listed in ``unranked``.
    """
    entries = []
    for H in all_subgroups(Fm.target.group, guard=subgroup_guard):
        source_fixed = Fm.source.fixed_indices(H)
        target_fixed = Fm.target.fixed_indices(H)
        source_h = fixed_homology(Fm.source, source_fixed, simplex_guard)
        target_h = fixed_homology(Fm.target, target_fixed, simplex_guard)
        ranks = None
        if source_h.nonzero() == target_h.nonzero() and not source_h.has_torsion():
            ranks = _induced_ranks(
                Fm, source_fixed, target_fixed, list(source_h.nonzero()), face_limit, simplex_guard
            )
        entries.append(
            RealizationEntry(
                subgroup=H.label(),
                subgroup_order=H.order,
                source_betti=source_h.nonzero(),
                target_betti=target_h.nonzero(),
                map_ranks=ranks,
            )
        )
    report = RealizationReport(Fm.name, tuple(entries))
    logger.info(
        "quillen.realization.checked",
        extra={"map": Fm.name, "subgroups": len(entries), "passed": report.passed},
    )
    return report

