from app.config import Config
from app.models import CheckJob, CheckResult
from app.scenario import parse_scenario
from app.worker import run_jobs


def _jobs(names):
    scenario = parse_scenario('gset="3"')
    return [CheckJob(scenario=scenario, check=name, config=Config()) for name in names]


def _echo(job):
    return CheckResult(name=job.check, verdict="PASS", anchor="")


def test_sequential_run_keeps_order():
    results = run_jobs(_jobs(["b", "a", "c"]), _echo)

    assert [r.name for r in results] == ["b", "a", "c"]


def test_pool_runs_keep_order():
    results = run_jobs(_jobs(["b", "a", "c"]), _echo, workers=2)

    assert [r.name for r in results] == ["b", "a", "c"]


def test_no_jobs():
    assert run_jobs([], _echo, workers=4) == []
