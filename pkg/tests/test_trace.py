from app.trace import build_run_context, build_run_id


def test_run_id_depends_on_seed_and_text():
    run_id = build_run_id('gset="4"', 0)

    assert len(run_id) == 16
    assert run_id == build_run_id('gset="4"', 0)
    assert run_id != build_run_id('gset="4"', 1)
    assert run_id != build_run_id('gset="5"', 0)


def test_run_context():
    context = build_run_context('gset="4"', 7, check="finality")

    assert context == {"run_id": build_run_id('gset="4"', 7), "seed": 7, "check": "finality"}
    assert "check" not in build_run_context('gset="4"', 7)
