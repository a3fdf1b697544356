"""The eight acceptance criteria, each at its stated size and time limit.

Run on its own with ``pytest tests/test_acceptance.py -v``; the terminal
summary ends with one PASS/FAIL line per criterion.
"""

import os
import random
import statistics
import subprocess
import sys
import time
from dataclasses import replace

import pytest

from conftest import ROOT
from randgraph import random_graph, random_pattern_query
from randspec import random_case, random_query
from obdac.bench import run_scenario, scenario
from obdac.mapping.model import ConstrainedSpec
from obdac.mapping.tmappings import saturate_tmappings, split_multi_template, virtual_assertions
from obdac.miner import mine
from obdac.relalg.evaluate import Evaluator
from obdac.sparql.ast import Query, rewrite_predicates
from obdac.sparql.evaluate import obda_graph, oracle_answer, query_answer, to_relation
from obdac.translator import CompileOptions, Compiler, all_option_combinations
from obdac.translator.tau import triple_instance, triple_translation


def test_criterion_1_soundness(record):
    """500 random cases, each compiled under all 24 option combinations with mined constraints."""
    start = time.perf_counter()
    failures, fired, combos = [], {"vfd": 0, "exact": 0}, all_option_combinations()
    for seed in range(500):
        rng = random.Random(seed)
        case = random_case(rng, n_props=4, reuse=0.6) if seed % 2 else random_case(rng)
        cspec = ConstrainedSpec(case.spec, mine(case.spec, case.inst).constraints())
        text, query = random_query(rng, case, max_ops=3, star=seed % 3 == 0)
        want = to_relation(oracle_answer(query, case.spec, case.inst), query.answer_vars)
        compiler = Compiler(cspec)
        for options in combos:
            expr, _, trace = compiler.translate(query, options)
            if not Evaluator(case.inst)(expr).same_as(want):
                failures.append(f"seed {seed} [{options.label()}] {text}")
                break
            if options == CompileOptions():
                for stage, before in (("vfd", "structural"), ("exact", "unfold")):
                    if trace.stage(stage) and trace.stage(stage).expr != trace.stage(before).expr:
                        fired[stage] += 1
    elapsed = time.perf_counter() - start
    record(1, not failures and elapsed < 120,
           f"500 cases x {len(combos)} combinations, {len(failures)} mismatches, rewrites fired: "
           f"VFD {fired['vfd']}, exact {fired['exact']}; {elapsed:.1f}s (limit 120s)"
           + (f"; first: {failures[0]}" if failures else ""))


def test_criterion_2_tau(record):
    """The triple-table translation agrees with the direct pattern semantics."""
    start = time.perf_counter()
    checked, failures = 0, []
    for seed in range(200):
        rng = random.Random(seed)
        graph = random_graph(rng, max_triples=50)
        inst = triple_instance(graph)
        for _ in range(5):
            query = random_pattern_query(rng)
            want = to_relation(query_answer(query, graph), query.answer_vars)
            checked += 1
            if not Evaluator(inst)(triple_translation(query)).same_as(want):
                failures.append(f"graph {seed}: {query}")
    elapsed = time.perf_counter() - start
    record(2, not failures and elapsed < 60,
           f"200 graphs, {checked} patterns, {len(failures)} mismatches, {elapsed:.1f}s (limit 60s)")


def test_criterion_3_wellbore(record, wellbore):
    cspec, _, queries = wellbore
    compiler = Compiler(cspec)
    _, _, best = compiler.translate(queries["wellbores"], CompileOptions())
    _, _, raw = compiler.translate(queries["wellbores"], CompileOptions.none())
    final, unfolded = best.stages[-1], raw.stages[-1]
    arms = unfolded.unions + 1  # one n-ary union of k arms counts k - 1
    ok = (final.joins, final.unions) == (0, 0) and (unfolded.joins, arms) == (2, 3)
    record(3, ok, f"exact+VFD: joins={final.joins} unions={final.unions}; "
                  f"no optimizations: joins={unfolded.joins} over a {arms}-arm union")


def test_criterion_4_exact_unions(record):
    counts = {}
    for name in ("E0", "E3"):
        sc = scenario(name, 1000)
        _, _, trace = Compiler(sc.cspec).translate(sc.queries["q3"], replace(sc.options, explain=True))
        counts[name] = trace.blocks[0][1]
    record(4, counts == {"E0": 12, "E3": 1},
           f"q3 mandatory block union branches: E0={counts['E0']} E3={counts['E3']} (expected 12 and 1)")


def _lemma_holds(spec, inst, vfd) -> bool | None:
    """Recompute both sides of the identity from scratch; None when not covered.

    The left side builds terms from the anchor's single mapping body; the
    right side joins the properties' facts in the saturated virtual graph.
    """
    tmaps = saturate_tmappings(spec.ontology, spec.mappings)
    members = {p: [m for m in tmaps if m.predicate == p] for p in vfd.properties}
    anchors = members[vfd.properties[0]]
    if len(anchors) != 1:
        return None
    anchor = anchors[0]
    rel = Evaluator(inst)(anchor.body)
    idx = {a: i for i, a in enumerate(rel.attrs)}
    objects = [members[p][0].obj for p in vfd.properties]
    if any(a not in idx for t in objects for a in t.attrs):
        return None
    left = set()
    for row in rel.rows:
        terms = [t.build([row[idx[a]] for a in t.attrs]) for t in (anchor.subject, *objects)]
        if terms[0] is not None and terms[1] is not None:
            left.add(tuple(terms))
    facts = {p: {} for p in vfd.properties}
    for s, p, o in obda_graph(spec, inst):
        if str(p) in facts:
            facts[str(p)].setdefault(s, set()).add(o)
    if vfd.kind == "branching":
        right = {(s,) for s in facts[vfd.properties[0]]}
        for p in vfd.properties:
            right = {r + (o,) for r in right for o in facts[p].get(r[0], ())}
    else:
        right = {(s, o) for s, os in facts[vfd.properties[0]].items() for o in os}
        for p in vfd.properties[1:]:
            right = {r + (o,) for r in right for o in facts[p].get(r[-1], ())}
    return left == right


def test_criterion_5_lemma(record):
    checked, violations, kinds = 0, [], {"branching": 0, "path": 0}
    seed = 0
    while checked < 100 and seed < 5000:
        case = random_case(random.Random(seed), n_props=4, reuse=0.6)
        for vfd in mine(case.spec, case.inst).constraints().vfds:
            holds = _lemma_holds(case.spec, case.inst, vfd)
            if holds is None:
                continue
            checked += 1
            kinds[vfd.kind] += 1
            if not holds:
                violations.append(f"seed {seed}: {vfd}")
        seed += 1
    record(5, checked >= 100 and not violations,
           f"{checked} certified VFDs ({kinds['branching']} branching, {kinds['path']} path), "
           f"{len(violations)} violations")


@pytest.mark.slow
def test_criterion_6_wisconsin(record):
    start = time.perf_counter()
    scale = 100_000
    family = [q for q in scenario("K2", scale).queries if q.startswith("q3/")]
    reports = {}
    for name in ("K2", "K3"):
        sc = scenario(name, scale)
        reports[name] = run_scenario(sc, scale, instance=sc.instance(scale, 0), queries=family)
    k2, k3 = reports["K2"], reports["K3"]
    ratio = statistics.fmean(r.mean for r in k2.results) / statistics.fmean(r.mean for r in k3.results)
    self_ok = all(k2.result(q).self_joins == 0 and k3.result(q).self_joins == int(q[1:q.index("/")])
                  for q in family)
    same = all(k2.result(q).answers == k3.result(q).answers for q in family)
    elapsed = time.perf_counter() - start
    record(6, ratio <= 0.6 and self_ok and same and elapsed < 600,
           f"{len(family)} q3 queries at {scale} rows: K2/K3 mean time ratio {ratio:.2f} (limit 0.6), "
           f"view self-joins K2=0 and K3=m: {self_ok}, equal answers: {same}, {elapsed:.0f}s (limit 600s)")


def test_criterion_7_split(record):
    checked, mismatches, seed = 0, [], 0
    while checked < 100:
        rng = random.Random(10_000 + seed)
        seed += 1
        case = random_case(rng, multi_template=True)
        renamed, table = split_multi_template(saturate_tmappings(case.spec.ontology, case.spec.mappings))
        if not table:
            continue
        checked += 1
        graph = virtual_assertions(renamed, case.inst)
        for _ in range(3):
            text, query = random_query(rng, case)
            split = Query(rewrite_predicates(query.pattern, table), query.answer_vars)
            if query_answer(split, graph) != oracle_answer(query, case.spec, case.inst):
                mismatches.append(f"seed {10_000 + seed - 1}: {text}")
    record(7, not mismatches,
           f"{checked} specifications with split predicates, 3 queries each, {len(mismatches)} mismatches")


_EMIT = """
import sys
from obdac.bench import scenario
from obdac.cli import main
from obdac.translator import CompileOptions, Compiler
main(["translate", "--project", sys.argv[1]])
main(["translate", "--project", sys.argv[1], "--cte"])
main(["translate", "--project", sys.argv[1], "--no-opt"])
for name in ("K1", "K2", "E0", "E3"):
    sc = scenario(name, 1000)
    compiler = Compiler(sc.cspec)
    for q in sorted(sc.queries):
        for options in (sc.options, CompileOptions(cte_mode=True), CompileOptions.none()):
            print(compiler.translate(sc.queries[q], options)[1])
"""


def test_criterion_8_determinism(record):
    outputs = []
    for hash_seed in ("0", "1", "12345"):
        env = {**os.environ, "PYTHONHASHSEED": hash_seed}
        done = subprocess.run([sys.executable, "-c", _EMIT, str(ROOT / "projects" / "wellbore")],
                              capture_output=True, env=env, check=True)
        outputs.append(done.stdout)
    same = len(set(outputs)) == 1
    record(8, same and len(outputs[0]) > 0,
           f"3 runs with different hash seeds, {len(outputs[0])} bytes of SQL each, identical: {same}")
