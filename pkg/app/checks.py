from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from app.config import Config
from app.constants import (
    CHECK_NAMES,
    DEFAULT_SURJECTION_ORACLE_POINTS,
    VERDICT_FAIL,
    VERDICT_PASS,
    VERDICT_REPORT_ONLY,
    VERDICT_SKIPPED,
)
from app.errors import GuardExceeded, SearchBudgetExceeded, check_guard
from app.gsets import coset_gset, isovariance_class, orbits, restrict
from app.lie_rep import verify_tree_homology_module
from app.models import CheckJob, CheckResult, Report, Scenario
from app.partitions import (
    build_equivariant_partition_poset,
    build_partition_poset,
    equivariant_partition_homology,
    equivariant_partitions_from_surjections,
    is_transitive_quotient_of_type,
    isovariant_wedge_prediction,
    orbit_partition,
    orthogonal_complement,
    two_orbit_subposet,
    verify_fixed_point_equivalence,
    weyl_identity_check,
)
from app.perm_groups import (
    Subgroup,
    all_subgroups,
    between_subgroup_poset,
    conjugacy_class_key,
    fano_collineation_group,
    is_normal,
    is_solvable,
    trivial_subgroup,
    whole_group,
)
from app.posets import compare_posets, has_conical_contraction, has_cone_point
from app.quillen import (
    check_G_finality,
    check_G_initiality,
    check_realization_equivalence,
    last_vertex_map,
    phi_map,
)
from app.simplicial_homology import (
    HomologyResult,
    character,
    fixed_point_complex,
    lefschetz_number,
    order_complex,
    reduced_homology,
)
from app.trace import build_run_context
from app.trees import (
    F_inverse,
    F_map,
    build_tree_poset,
    build_tree_space,
    enumerate_reduced_trees,
    random_measured_tree,
    verify_tree_fixed_points,
    verify_tree_space_fixed_points,
)
from app.worker import run_jobs

logger = logging.getLogger(__name__)


@dataclass
class Outcome:
    verdict: str
    payload: Dict[str, Any] = field(default_factory=dict)
    reason: Optional[str] = None


CheckFn = Callable[[Scenario, Config], Outcome]

_CHECKS: Dict[str, Tuple[str, CheckFn]] = {}


def register(name: str, anchor: str) -> Callable[[CheckFn], CheckFn]:
    if name not in CHECK_NAMES:
        raise ValueError(f"Unknown check name {name!r}")

    def decorator(fn: CheckFn) -> CheckFn:
        _CHECKS[name] = (anchor, fn)
        return fn

    return decorator


def anchor_of(name: str) -> str:
    return _CHECKS[name][0]


def _verdict(passed: bool) -> str:
    return VERDICT_PASS if passed else VERDICT_FAIL


def _skip(reason: str) -> Outcome:
    return Outcome(VERDICT_SKIPPED, reason=reason)


def _betti(result: HomologyResult) -> Dict[str, int]:
    return {str(d): b for d, b in result.nonzero().items()}


def _subgroups(scenario: Scenario, config: Config) -> List[Subgroup]:
    return all_subgroups(scenario.group, guard=config.subgroups)


def _class_representatives(subgroups: List[Subgroup]) -> List[Subgroup]:
    seen = set()
    reps = []
    for H in subgroups:
        key = conjugacy_class_key(H)
        if key not in seen:
            seen.add(key)
            reps.append(H)
    return reps


def _value(x) -> Any:
    return x.numerator if x.denominator == 1 else str(x)


def _render_lattice_object(obj: object) -> str:
    return obj.label() if isinstance(obj, Subgroup) else str(obj)


@register(
    "partition-homology",
    "partition complex on n points is a wedge of (n-1)! spheres of dimension n-3",
)
def check_partition_homology(scenario: Scenario, config: Config) -> Outcome:
    A = scenario.gset
    n = A.size
    if n < 3:
        return _skip("the partition poset is empty below three points")
    P = build_partition_poset(A, guard=config.partition_points)
    K = order_complex(P, guard=config.simplices)
    homology = reduced_homology(K)
    expected = {n - 3: math.factorial(n - 1)}
    passed = homology.nonzero() == expected and not homology.has_torsion()
    payload: Dict[str, Any] = {
        "objects": P.size,
        "face_counts": list(K.face_counts()),
        "homology": homology.as_payload(),
        "expected_reduced_betti": {str(d): b for d, b in expected.items()},
    }
    if n <= config.tree_module_points and homology.concentrated_in() == n - 3:
        chi = character(K, n - 3)
        rows = []
        for members in A.group.conjugacy_classes:
            g = members[0]
            trace = lefschetz_number(K, K.vertex_action[g])
            predicted = (-1) ** (n - 3) * chi.values[g]
            rows.append(
                {
                    "representative": str(A.group.elements[g]),
                    "character": _value(chi.values[g]),
                    "lefschetz": trace,
                    "agrees": trace == predicted,
                }
            )
            passed = passed and trace == predicted
        payload["classes"] = rows
    return Outcome(_verdict(passed), payload)


@register(
    "fixed-point-equivalence",
    "fixed points of the partition poset are the equivariant partitions",
)
def check_fixed_point_equivalence(scenario: Scenario, config: Config) -> Outcome:
    A = scenario.gset
    entries = []
    passed = True
    for H in _subgroups(scenario, config):
        comparison = verify_fixed_point_equivalence(
            A, H, guard=config.partition_points, node_cap=config.iso_nodes
        )
        entry: Dict[str, Any] = {"subgroup": H.label(), **comparison.as_payload()}
        ok = comparison.holds
        if A.size <= DEFAULT_SURJECTION_ORACLE_POINTS:
            direct = build_equivariant_partition_poset(A, H, guard=config.partition_points)
            oracle = equivariant_partitions_from_surjections(restrict(A, H))
            entry["surjection_oracle_agrees"] = set(oracle) == set(direct.objects)
            ok = ok and entry["surjection_oracle_agrees"]
        passed = passed and ok
        entries.append(entry)
    return Outcome(_verdict(passed), {"subgroups": entries})


@register(
    "tree-fixed-points",
    "fixed points of the tree poset and tree space are built from equivariant trees",
)
def check_tree_fixed_points(scenario: Scenario, config: Config) -> Outcome:
    A = scenario.gset
    if A.size < 3:
        return _skip("no reduced trees below three leaves")
    entries = []
    passed = True
    for H in _subgroups(scenario, config):
        comparison = verify_tree_fixed_points(
            A, H, guard=config.tree_points, node_cap=config.iso_nodes
        )
        space = verify_tree_space_fixed_points(A, H, guard=config.tree_points)
        entries.append(
            {
                "subgroup": H.label(),
                "poset": comparison.as_payload(),
                "space": {
                    "vertices": list(space.vertices),
                    "simplices": list(space.simplices),
                    "matches": space.matches,
                },
            }
        )
        passed = passed and comparison.holds and space.matches
    return Outcome(_verdict(passed), {"subgroups": entries})


@register("tree-homeo-roundtrip", "tree space, tree poset and partition complex are G-homeomorphic")
def check_tree_homeo_roundtrip(scenario: Scenario, config: Config) -> Outcome:
    A = scenario.gset
    n = A.size
    if n < 3:
        return _skip("no reduced trees below three leaves")
    check_guard("zig-zag points", config.zigzag_points, n)
    space = build_tree_space(A, guard=config.tree_points)
    tree_poset = build_tree_poset(A, guard=config.tree_points)
    partitions = build_partition_poset(A, guard=config.partition_points)
    fixed_rows = []
    passed = True
    for H in _subgroups(scenario, config):
        members = [space.vertex_action[h] for h in sorted(H.members)]
        fixed_space, _ = fixed_point_complex(space, members)
        betti = [
            reduced_homology(fixed_space).nonzero(),
            reduced_homology(
                order_complex(tree_poset.fixed_subposet(H), guard=config.simplices)
            ).nonzero(),
            reduced_homology(
                order_complex(partitions.fixed_subposet(H), guard=config.simplices)
            ).nonzero(),
        ]
        agree = betti[0] == betti[1] == betti[2]
        passed = passed and agree
        fixed_rows.append(
            {
                "subgroup": H.label(),
                "tree_space": {str(d): b for d, b in betti[0].items()},
                "tree_poset": {str(d): b for d, b in betti[1].items()},
                "partition_complex": {str(d): b for d, b in betti[2].items()},
                "agree": agree,
            }
        )

    rng = random.Random(config.seed)
    trees = enumerate_reduced_trees(A, guard=config.tree_points)
    generators = [A.perm(g) for g in A.group.generator_indices]
    roundtrip_failures = 0
    equivariance_failures = 0
    for _ in range(config.samples):
        M = random_measured_tree(trees, rng)
        chain, coords = F_map(M)
        if F_inverse(chain, coords) != M:
            roundtrip_failures += 1
        for perm in generators:
            moved_chain, moved_coords = F_map(M.relabel(perm))
            if moved_chain != [t.relabel(perm) for t in chain] or moved_coords != coords:
                equivariance_failures += 1
    passed = passed and roundtrip_failures == 0 and equivariance_failures == 0
    payload = {
        "fixed_points": fixed_rows,
        "samples": config.samples,
        "seed": config.seed,
        "roundtrip_failures": roundtrip_failures,
        "equivariance_failures": equivariance_failures,
    }
    return Outcome(_verdict(passed), payload)


@register("finality", "the functor from chains of partitions to trees is G-homotopy final")
def check_finality(scenario: Scenario, config: Config) -> Outcome:
    A = scenario.gset
    if A.size < 3:
        return _skip("both posets are empty below three points")
    check_guard("fibre points", config.fibre_points, A.size)
    Fm = phi_map(
        A,
        partition_guard=config.partition_points,
        tree_guard=config.tree_points,
        chain_guard=config.chains,
    )
    monotone = Fm.is_monotone()
    equivariant = Fm.is_equivariant()
    report = check_G_finality(
        Fm, subgroup_guard=config.subgroups, simplex_guard=config.simplices
    )
    payload = {"monotone": monotone, "equivariant": equivariant, **report.as_payload()}
    return Outcome(_verdict(monotone and equivariant and report.passed), payload)


@register("initiality", "the last-vertex map on chains of partitions is G-homotopy initial")
def check_initiality(scenario: Scenario, config: Config) -> Outcome:
    A = scenario.gset
    if A.size < 3:
        return _skip("the partition poset is empty below three points")
    check_guard("fibre points", config.fibre_points, A.size)
    P = build_partition_poset(A, guard=config.partition_points)
    Fm = last_vertex_map(P, guard=config.chains)
    monotone = Fm.is_monotone()
    equivariant = Fm.is_equivariant()
    report = check_G_initiality(
        Fm, subgroup_guard=config.subgroups, simplex_guard=config.simplices
    )
    payload = {"monotone": monotone, "equivariant": equivariant, **report.as_payload()}
    return Outcome(_verdict(monotone and equivariant and report.passed), payload)


@register("zigzag-betti", "the zig-zag between partitions and trees is a G-homotopy equivalence")
def check_zigzag_betti(scenario: Scenario, config: Config) -> Outcome:
    A = scenario.gset
    if A.size < 3:
        return _skip("both posets are empty below three points")
    check_guard("zig-zag points", config.zigzag_points, A.size)
    phi = phi_map(
        A,
        partition_guard=config.partition_points,
        tree_guard=config.tree_points,
        chain_guard=config.chains,
    )
    last = last_vertex_map(phi.source.base, guard=config.chains)
    legs = [
        check_realization_equivalence(
            Fm,
            subgroup_guard=config.subgroups,
            simplex_guard=config.simplices,
            face_limit=config.map_rank_faces,
        )
        for Fm in (phi, last)
    ]
    passed = all(leg.passed for leg in legs)
    unranked = [f"{leg.map_name}:{label}" for leg in legs for label in leg.unranked]
    reason = None
    if passed and unranked:
        reason = (
            f"induced ranks not computed above {config.map_rank_faces} faces for "
            f"{', '.join(unranked)}; Betti numbers compared only"
        )
    payload = {"legs": [leg.as_payload() for leg in legs], "unranked": unranked}
    return Outcome(_verdict(passed), payload, reason=reason)


@register(
    "nonisovariant-acyclic",
    "equivariant partitions of a non-isovariant G-set are contractible",
)
def check_nonisovariant_acyclic(scenario: Scenario, config: Config) -> Outcome:
    A = scenario.gset
    if isovariance_class(A) is not None:
        return _skip("the G-set is isovariant")
    PG = build_equivariant_partition_poset(
        A, whole_group(A.group), guard=config.partition_points
    )
    homology = reduced_homology(order_complex(PG, guard=config.simplices))
    cone = has_cone_point(PG)
    conical = has_conical_contraction(PG)
    two = two_orbit_subposet(PG, A)
    two_homology = reduced_homology(order_complex(two, guard=config.simplices))
    two_cone = has_cone_point(two)
    passed = (
        PG.is_connected()
        and homology.is_acyclic()
        and two.is_connected()
        and two_homology.is_acyclic()
    )

    def render(poset, i: Optional[int]) -> Optional[str]:
        return poset.objects[i].render(A.names) if i is not None else None

    payload = {
        "objects": PG.size,
        "homology": homology.as_payload(),
        "cone_point": render(PG, cone),
        "conical_contraction": render(PG, conical),
        "two_orbit_objects": two.size,
        "two_orbit_homology": two_homology.as_payload(),
        "two_orbit_cone_point": render(two, two_cone),
    }
    return Outcome(_verdict(passed), payload)


def _isovariant_type(scenario: Scenario) -> Tuple[Optional[Subgroup], int]:
    A = scenario.gset
    return isovariance_class(A), len(orbits(A))


@register(
    "isovariant-wedge",
    "equivariant partitions of m copies of G/H form a wedge of suspension smashes",
)
def check_isovariant_wedge(scenario: Scenario, config: Config) -> Outcome:
    A = scenario.gset
    H, m = _isovariant_type(scenario)
    if H is None:
        return _skip("the G-set is not isovariant")
    if m < 2:
        return _skip("the wedge decomposition needs at least two orbits")
    direct = equivariant_partition_homology(
        A, guard=config.partition_points, simplex_guard=config.simplices
    )
    prediction = isovariant_wedge_prediction(A.group, H, m, guard=config.partition_points)
    matches = direct.nonzero() == prediction.nonzero()
    if not prediction.rational_only:
        matches = matches and not direct.has_torsion()
    payload: Dict[str, Any] = {
        "subgroup": H.label(),
        "orbits": m,
        "direct": direct.as_payload(),
        "predicted_reduced_betti": {str(d): b for d, b in prediction.nonzero().items()},
        "summands": prediction.summands,
        "weyl_order": prediction.weyl_order,
        "rational_only": prediction.rational_only,
        "degenerate": prediction.degenerate,
    }
    passed = matches
    alpha_partition = orbit_partition(A)
    if not alpha_partition.is_trivial():
        PG = build_equivariant_partition_poset(
            A, whole_group(A.group), guard=config.partition_points
        )
        alpha = PG.index[alpha_partition]
        bounds = orthogonal_complement(PG, alpha, method="bounds")
        lattice = orthogonal_complement(PG, alpha, method="lattice")
        expected = [
            i
            for i, p in enumerate(PG.objects)
            if is_transitive_quotient_of_type(A, p, H) and i != alpha
        ]
        payload["orthogonal_complement"] = [PG.objects[i].render(A.names) for i in bounds]
        payload["complement_methods_agree"] = bounds == lattice
        payload["complement_is_transitive_type"] = bounds == expected
        passed = passed and bounds == lattice and bounds == expected
    return Outcome(_verdict(passed), payload)


@register("weyl-identity", "wedge-count identity between Weyl groups in symmetric groups")
def check_weyl_identity(scenario: Scenario, config: Config) -> Outcome:
    H, m = _isovariant_type(scenario)
    if H is None:
        return _skip("the G-set is not isovariant")
    report = weyl_identity_check(scenario.group, H, m, guard=config.weyl_points)
    return Outcome(VERDICT_REPORT_ONLY, {"subgroup": H.label(), **report.as_payload()})


@register(
    "subgroup-lattice",
    "equivariant partitions of G/H are the subgroups strictly between H and G",
)
def check_subgroup_lattice(scenario: Scenario, config: Config) -> Outcome:
    G = scenario.group
    entries = []
    passed = True
    for H in _class_representatives(_subgroups(scenario, config)):
        if H.is_whole():
            continue
        between = between_subgroup_poset(G, H)
        PG = build_equivariant_partition_poset(
            coset_gset(G, H), whole_group(G), guard=config.partition_points
        )
        comparison = compare_posets(
            PG, between, node_cap=config.iso_nodes, render=_render_lattice_object
        )
        homology = reduced_homology(order_complex(between, guard=config.simplices))
        entries.append(
            {
                "subgroup": H.label(),
                "subgroup_order": H.order,
                "points": between.size,
                "relations": between.relation_count(),
                "reduced_betti": _betti(homology),
                "torsion": homology.as_payload()["torsion"],
                "matches_equivariant_partitions": comparison.holds,
            }
        )
        passed = passed and comparison.holds
    return Outcome(_verdict(passed), {"subgroups": entries})


PSL27_ORDER = 168
PSL27_REDUCED_BETTI = {1: 48, 2: 48}


@register(
    "psl27-lattice",
    "proper nontrivial subgroups of PSL(2, 7) realize to 48 circles wedged with 48 two-spheres",
)
def check_psl27_lattice(scenario: Scenario, config: Config) -> Outcome:
    check_guard("lattice group order", config.lattice_order, PSL27_ORDER)
    G = fano_collineation_group()
    between = between_subgroup_poset(G, trivial_subgroup(G))
    homology = reduced_homology(order_complex(between, guard=config.simplices))
    payload = {
        "group_order": G.order,
        "points": between.size,
        "reduced_betti": _betti(homology),
        "torsion": homology.as_payload()["torsion"],
    }
    passed = (
        G.order == PSL27_ORDER
        and homology.nonzero() == PSL27_REDUCED_BETTI
        and not homology.has_torsion()
    )
    return Outcome(_verdict(passed), payload)


@register(
    "lie-character",
    "top homology of the tree space is the sign twist of the Lie representation",
)
def check_lie_character(scenario: Scenario, config: Config) -> Outcome:
    A = scenario.gset
    if A.size < 3:
        return _skip("the tree space needs at least three leaves")
    report = verify_tree_homology_module(
        A, guard=config.tree_module_points, lie_guard=config.lie_degree
    )
    return Outcome(_verdict(report.passed), report.as_payload())


@register("solvable-wedge", "solvable G with normal H gives a wedge of equidimensional spheres")
def check_solvable_wedge(scenario: Scenario, config: Config) -> Outcome:
    A = scenario.gset
    H, m = _isovariant_type(scenario)
    if H is None:
        return _skip("the G-set is not isovariant")
    if m < 2:
        return _skip("the wedge decomposition needs at least two orbits")
    if not is_solvable(A.group) or not is_normal(H, A.group):
        return _skip("needs a solvable group and a normal isotropy subgroup")
    direct = equivariant_partition_homology(
        A, guard=config.partition_points, simplex_guard=config.simplices
    )
    degrees = sorted(direct.nonzero())
    passed = len(degrees) <= 1 and not direct.has_torsion()
    payload = {
        "subgroup": H.label(),
        "orbits": m,
        "homology": direct.as_payload(),
        "sphere_dimension": degrees[0] if len(degrees) == 1 else None,
        "sphere_count": direct.nonzero()[degrees[0]] if len(degrees) == 1 else 0,
    }
    return Outcome(_verdict(passed), payload)


def run_check(job: CheckJob) -> CheckResult:
    anchor, fn = _CHECKS[job.check]
    context = {**job.run_context, "check": job.check}
    logger.info("check.started", extra=context)
    started = time.perf_counter()
    try:
        outcome = fn(job.scenario, job.config)
    except (GuardExceeded, SearchBudgetExceeded) as exc:
        outcome = _skip(str(exc))
    except Exception as exc:  # noqa: BLE001
        logger.exception("check.failed", extra=context)
        outcome = Outcome(VERDICT_FAIL, reason=f"{type(exc).__name__}: {exc}")
    seconds = time.perf_counter() - started
    logger.info(
        "check.finished",
        extra={**context, "verdict": outcome.verdict, "seconds": round(seconds, 3)},
    )
    return CheckResult(
        name=job.check,
        verdict=outcome.verdict,
        anchor=anchor,
        payload=outcome.payload,
        reason=outcome.reason,
        seconds=seconds,
    )


def run_checks(scenario: Scenario, config: Config) -> Report:
    """Run the scenario's checks in check-name order, in parallel up to ``config.workers``."""
    context = build_run_context(scenario.text, config.seed)
    logger.info(
        "checks.started",
        extra={**context, "scenario": scenario.name, "checks": scenario.checks},
    )
    jobs = [
        CheckJob(scenario=scenario, check=name, config=config, run_context=context)
        for name in CHECK_NAMES
        if name in scenario.checks
    ]
    results = run_jobs(jobs, run_check, workers=config.workers)
    report = Report(scenario=scenario, results=results, seed=config.seed)
    logger.info(
        "checks.finished",
        extra={
            **context,
            "failed": [r.name for r in report.failed],
            "exit_code": report.exit_code,
        },
    )
    return report
