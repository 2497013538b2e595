from app import checks
from app.checks import anchor_of, run_check, run_checks
from app.config import Config
from app.constants import (
    CHECK_NAMES,
    VERDICT_FAIL,
    VERDICT_PASS,
    VERDICT_REPORT_ONLY,
    VERDICT_SKIPPED,
)
from app.models import CheckJob
from app.scenario import parse_scenario

FOUR_POINTS = 'gset="4"'
ORBIT_AND_POINT = 'group="(1 2)"; gset="G/e + 1"'
FREE_C2 = 'group="(1 2)"; gset="G/e + G/e"'
C4_MIXED = 'group="(1 2 3 4)"; gset="G/e + G/(1 3)(2 4)"'


def _config(**overrides):
    return Config(samples=5, **overrides)


def _run(text, check, **overrides):
    job = CheckJob(scenario=parse_scenario(text), check=check, config=_config(**overrides))
    return run_check(job)


def test_every_check_is_registered_with_an_anchor():
    for name in CHECK_NAMES:
        assert anchor_of(name)


def test_partition_homology_on_four_points():
    result = _run(FOUR_POINTS, "partition-homology")

    assert result.verdict == VERDICT_PASS
    assert result.payload["homology"]["reduced_betti"] == {"1": 6}
    assert all(row["agrees"] for row in result.payload["classes"])


def test_partition_homology_skips_small_sets():
    result = _run('gset="2"', "partition-homology")

    assert result.verdict == VERDICT_SKIPPED
    assert "three points" in result.reason


def test_fixed_points_on_free_c2():
    result = _run(FREE_C2, "fixed-point-equivalence")

    assert result.verdict == VERDICT_PASS
    assert [entry["subgroup"] for entry in result.payload["subgroups"]] == ["e", "G"]
    assert all(entry["surjection_oracle_agrees"] for entry in result.payload["subgroups"])


def test_fixed_points_on_c4_mixed():
    result = _run(C4_MIXED, "fixed-point-equivalence")

    assert result.verdict == VERDICT_PASS
    assert len(result.payload["subgroups"]) == 3


def test_fibre_checks_on_c4_mixed():
    finality = _run(C4_MIXED, "finality")

    assert finality.verdict == VERDICT_PASS
    assert finality.payload["monotone"] and finality.payload["equivariant"]
    assert _run(C4_MIXED, "initiality").verdict == VERDICT_PASS


def test_nonisovariant_acyclic_on_c4_mixed():
    result = _run(C4_MIXED, "nonisovariant-acyclic")

    assert result.verdict == VERDICT_PASS
    assert result.payload["homology"]["reduced_betti"] == {}


def test_tree_checks_on_free_c2():
    assert _run(FREE_C2, "tree-fixed-points").verdict == VERDICT_PASS
    roundtrip = _run(FREE_C2, "tree-homeo-roundtrip")
    assert roundtrip.verdict == VERDICT_PASS
    assert roundtrip.payload["roundtrip_failures"] == 0


def test_zigzag_checks_on_four_points():
    for name in ("finality", "initiality", "zigzag-betti"):
        assert _run(FOUR_POINTS, name).verdict == VERDICT_PASS


def test_zigzag_reports_unranked_subgroups():
    result = _run(FOUR_POINTS, "zigzag-betti", map_rank_faces=1)

    assert result.verdict == VERDICT_PASS
    assert "Betti numbers compared only" in result.reason
    assert result.payload["unranked"]
    assert not all(
        entry["ranks_checked"]
        for leg in result.payload["legs"]
        for entry in leg["subgroups"]
    )


def test_guards_skip_fibre_and_zigzag_checks():
    fibres = _run(FOUR_POINTS, "finality", fibre_points=3)
    zigzag = _run(FOUR_POINTS, "zigzag-betti", zigzag_points=3)

    assert fibres.verdict == VERDICT_SKIPPED
    assert "fibre points guard exceeded" in fibres.reason
    assert zigzag.verdict == VERDICT_SKIPPED
    assert "zig-zag points guard exceeded" in zigzag.reason


def test_nonisovariant_acyclic():
    result = _run(ORBIT_AND_POINT, "nonisovariant-acyclic")

    assert result.verdict == VERDICT_PASS
    assert result.payload["cone_point"] == "(a0 a1)(p1)"
    assert _run(FREE_C2, "nonisovariant-acyclic").verdict == VERDICT_SKIPPED


def test_isovariant_wedge_on_free_c2():
    result = _run(FREE_C2, "isovariant-wedge")

    assert result.verdict == VERDICT_PASS
    assert result.payload["predicted_reduced_betti"] == {"0": 2}
    assert result.payload["complement_is_transitive_type"] is True


def test_weyl_identity_is_report_only():
    result = _run(FREE_C2, "weyl-identity")

    assert result.verdict == VERDICT_REPORT_ONLY
    assert result.payload["matches_m_minus_1"] is True


def test_subgroup_lattice_on_s3():
    result = _run('group="(1 2);(1 2 3)"; gset="G/e"', "subgroup-lattice")

    assert result.verdict == VERDICT_PASS
    assert len(result.payload["subgroups"]) == 3


def test_lie_character_and_solvable_wedge():
    assert _run(FREE_C2, "lie-character").verdict == VERDICT_PASS
    solvable = _run(FREE_C2, "solvable-wedge")
    assert solvable.verdict == VERDICT_PASS
    assert solvable.payload["sphere_count"] == 2


def test_unexpected_errors_fail_the_check(monkeypatch):
    def boom(scenario, config):
        raise ArithmeticError("broken")

    monkeypatch.setitem(checks._CHECKS, "weyl-identity", ("anchor", boom))
    result = _run(FREE_C2, "weyl-identity")

    assert result.verdict == VERDICT_FAIL
    assert result.reason == "ArithmeticError: broken"


def test_run_checks_keeps_check_order():
    scenario = parse_scenario(FREE_C2 + '; checks="lie-character, weyl-identity, finality"')
    report = run_checks(scenario, _config())

    assert [r.name for r in report.results] == ["finality", "weyl-identity", "lie-character"]
    assert report.exit_code == 0
    assert all(r.seconds is not None for r in report.results)


def test_psl27_lattice_is_off_by_default():
    result = _run(FOUR_POINTS, "psl27-lattice")

    assert result.verdict == VERDICT_SKIPPED
    assert result.reason == "lattice group order guard exceeded: 168 > 0"
