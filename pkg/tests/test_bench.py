import pytest

from obdac.bench import (SCENARIOS, BudgetError, check_budget, estimate_mb, generate, memory_budget,
                         run_scenario, scenario)
from obdac.bench.wisconsin import WISCONSIN_ATTRS
from obdac.relalg import Evaluator
from obdac.sparql import oracle_answer, to_relation
from obdac.translator import CompileOptions, Compiler


def test_wisconsin_relations_have_sixteen_attributes():
    data = generate(50, 0, {"tab1"})
    assert len(WISCONSIN_ATTRS) == 16
    assert all(len(row) == 16 for row in data["tab1"])
    assert sorted(row[WISCONSIN_ATTRS.index("unique2")] for row in data["tab1"]) == list(range(50))


def test_generation_is_deterministic():
    assert generate(200, 7, {"tab1", "view2"}) == generate(200, 7, {"tab1", "view2"})
    assert generate(200, 7, {"tab1"}) != generate(200, 8, {"tab1"})


@pytest.mark.parametrize("name", SCENARIOS)
def test_scenarios_agree_with_the_oracle(name):
    sc = scenario(name, 100)
    inst = sc.instance(100, 0)
    compiler = Compiler(sc.cspec)
    for qname in sorted(sc.queries)[::5]:
        query = sc.queries[qname]
        want = to_relation(oracle_answer(query, sc.cspec.spec, inst), query.answer_vars)
        expr, _, _ = compiler.translate(query, sc.options)
        assert Evaluator(inst)(expr).same_as(want), qname


def test_vfd_scenarios_count_view_self_joins():
    k2 = run_scenario("K2", 300, runs=1, queries=["q3/2@0.01"])
    k3 = run_scenario("K3", 300, runs=1, queries=["q3/2@0.01"])
    assert k2.result("q3/2@0.01").self_joins == 0
    assert k3.result("q3/2@0.01").self_joins == 3
    assert k2.result("q3/2@0.01").answers == k3.result("q3/2@0.01").answers
    text = k2.format(k3)
    assert "d_self" in text and "indicative" in text


def test_exact_scenarios_shrink_the_union():
    branches = {}
    for name in ("E0", "E1", "E2", "E3"):
        sc = scenario(name, 400)
        report = run_scenario(sc, 400, runs=1, queries=["q3"])
        branches[name] = report.result("q3").branches
    assert branches["E0"] == 12 and branches["E3"] == 1
    assert branches["E0"] >= branches["E1"] >= branches["E2"] >= branches["E3"]


def test_memory_budget(monkeypatch):
    assert estimate_mb("K2", 100_000) <= memory_budget()
    with pytest.raises(BudgetError, match="--scale"):
        check_budget("K2", 10_000_000, 2048)
    monkeypatch.setenv("OBDAC_BENCH_MEMORY_MB", "64")
    assert memory_budget() == 64
    assert memory_budget(512) == 512
    with pytest.raises(BudgetError):
        run_scenario("K2", 100_000, runs=1)


def test_scenario_options():
    assert scenario("K3", 100).options == CompileOptions(vfd=False)
    assert not scenario("K3", 100).cspec.constraints.vfds
    assert scenario("K2", 100).cspec.constraints.vfds
    assert set(scenario("K1", 100).texts) == {"schema.txt", "ontology.ttl", "mappings.txt", "constraints.txt"}
