import pytest

from obdac.mapping import ConstrainedSpec, ObdaSpec, parse_constraints, parse_mappings
from obdac.miner import mine
from obdac.ontology import parse_ontology
from obdac.relalg import Evaluator, Instance, count_scans, parse_schema
from obdac.sparql import oracle_answer, parse_query, to_relation
from obdac.translator import CompileOptions, Compiler, all_option_combinations, emit_sql


def make(schema, ontology, mappings, data, constraints=""):
    schema = parse_schema(schema)
    maps, prefixes = parse_mappings(mappings, schema)
    spec = ObdaSpec(parse_ontology(ontology), maps, schema, prefixes)
    inst = Instance(schema, data)
    return ConstrainedSpec(spec, parse_constraints(constraints, prefixes=prefixes)), inst


def agrees(cspec, inst, text, options):
    q = parse_query(text)
    expr, _, _ = Compiler(cspec).translate(q, options)
    want = to_relation(oracle_answer(q, cspec.spec, inst), q.answer_vars)
    return Evaluator(inst)(expr).same_as(want)


# A denormalized staff table: the manager depends on the department.
STAFF = make(
    "relation staff(id int, dept int, mgr int)\nkey staff(id)",
    ":worksIn a owl:ObjectProperty .\n:managedBy a owl:ObjectProperty .",
    """
map w: :e/{id} :worksIn :d/{dept} <- SELECT * FROM staff WHERE dept IS NOT NULL AND mgr IS NOT NULL
map m: :d/{dept} :managedBy :e/{mgr} <- SELECT * FROM staff WHERE dept IS NOT NULL AND mgr IS NOT NULL
""",
    {"staff": [(1, 10, 7), (2, 10, 7), (3, 20, 8), (7, 20, 8), (8, None, None)]},
    "vfd path :e/{} : :worksIn :managedBy",
)
CHAIN = "SELECT ?x ?m WHERE { ?x :worksIn ?d . ?d :managedBy ?m }"


def test_path_vfd_reads_the_anchor_body_once():
    cspec, inst = STAFF
    expr, _, trace = Compiler(cspec).translate(parse_query(CHAIN), CompileOptions(semantic_keys=False))
    assert trace.stages[-1].joins == 0
    assert count_scans(expr, "staff") == 1
    assert agrees(cspec, inst, CHAIN, CompileOptions())


def test_path_vfd_is_certified_by_the_miner():
    cspec, inst = STAFF
    report = mine(cspec.spec, inst)
    assert str(cspec.constraints.vfds[0]) in {str(v) for v in report.constraints().vfds}


# Two attributes of one keyed table, mapped separately.
KEYED = make(
    "relation r(k int, a int, b int)\nkey r(k)",
    ":pa a owl:DatatypeProperty .\n:pb a owl:DatatypeProperty .",
    """
map a: :u/{k} :pa {a} <- SELECT k, a FROM r WHERE a IS NOT NULL
map b: :u/{k} :pb {b} <- SELECT k, b FROM r WHERE b IS NOT NULL
""",
    {"r": [(1, 1, 2), (2, None, 3), (3, 4, None)]},
)
STAR = "SELECT * WHERE { ?x :pa ?a . ?x :pb ?b }"


def test_key_self_join_is_merged():
    cspec, inst = KEYED
    compiler = Compiler(cspec)
    plain, _, _ = compiler.translate(parse_query(STAR), CompileOptions(semantic_keys=False))
    merged, _, _ = compiler.translate(parse_query(STAR), CompileOptions())
    assert count_scans(plain, "r") == 2
    assert count_scans(merged, "r") == 1
    assert Evaluator(inst)(merged).same_as(Evaluator(inst)(plain))


# One class with two subject templates, so a join between them is empty.
SHAPES = make(
    "relation r(k int, a int)\nrelation s(k int)",
    ":C a owl:Class .\n:pa a owl:DatatypeProperty .",
    """
map c1: :u/{k} a :C <- SELECT k FROM r
map c2: :v/{k} a :C <- SELECT k FROM s
map pa: :u/{k} :pa {a} <- SELECT k, a FROM r WHERE a IS NOT NULL
""",
    {"r": [(1, 5), (2, None)], "s": [(1,), (3,)]},
)
TYPED = "SELECT * WHERE { ?x a :C . ?x :pa ?a }"


def test_structural_pruning_drops_incompatible_templates():
    cspec, inst = SHAPES
    compiler = Compiler(cspec)
    _, _, trace = compiler.translate(parse_query(TYPED), CompileOptions(semantic_keys=False))
    assert trace.stage("unfold").unions == 1
    assert trace.stage("structural").unions == 0
    expr, _, _ = compiler.translate(parse_query(TYPED), CompileOptions())
    assert count_scans(expr, "s") == 0
    for options in all_option_combinations():
        assert agrees(cspec, inst, TYPED, options)


def test_branch_budget_leaves_a_note():
    cspec, inst = SHAPES
    options = CompileOptions(branch_budget=1, explain=True)
    expr, _, trace = Compiler(cspec).translate(parse_query(TYPED), options)
    assert any("budget" in note for note in trace.notes)
    assert agrees(cspec, inst, TYPED, options)


def test_wellbore_stage_counts_never_grow(wellbore):
    cspec, _, queries = wellbore
    compiler = Compiler(cspec)
    for query in queries.values():
        _, _, trace = compiler.translate(query, CompileOptions())
        counted = [s for s in trace.stages if s.name in ("exact", "vfd", "semantic")]
        for before, after in zip(counted, counted[1:]):
            assert after.joins <= before.joins and after.unions <= before.unions


def test_wellbore_all_combinations_match_the_oracle(wellbore):
    cspec, inst, queries = wellbore
    for query in queries.values():
        want = to_relation(oracle_answer(query, cspec.spec, inst), query.answer_vars)
        for options in all_option_combinations():
            expr, _, _ = Compiler(cspec).translate(query, options)
            assert Evaluator(inst)(expr).same_as(want), options.label()


def test_cte_mode_shares_the_optimizing_body(wellbore):
    cspec, _, queries = wellbore
    query = parse_query("SELECT * WHERE { { ?w :completionDate ?c . ?w :isInWell ?x } UNION "
                        "{ ?w a :Wellbore . ?w :isInWell ?x . ?w :completionDate ?c } }")
    _, sql, _ = Compiler(cspec).translate(query, CompileOptions(cte_mode=True))
    assert sql.startswith("WITH ")
    _, plain, _ = Compiler(cspec).translate(query, CompileOptions())
    assert not plain.startswith("WITH ")


def test_explain_trace(wellbore):
    cspec, _, queries = wellbore
    _, _, trace = Compiler(cspec).translate(queries["wellbores"], CompileOptions(explain=True))
    text = trace.format()
    for stage in ("unfold", "exact", "structural", "vfd", "semantic"):
        assert stage in text
    assert trace.blocks and trace.blocks[0][1] == 1


def test_emitted_sql_shape(wellbore):
    cspec, _, queries = wellbore
    expr, sql, _ = Compiler(cspec).translate(queries["wellbores"], CompileOptions())
    assert sql == emit_sql(expr)
    assert sql.startswith("SELECT DISTINCT") and sql.endswith(";\n")
    assert sql.count("FROM wellbore") == 1


def test_cte_requires_vfd():
    with pytest.raises(ValueError):
        CompileOptions(cte_mode=True, vfd=False)
    assert len(all_option_combinations()) == 24
    assert CompileOptions.none().label() == "none"


def test_parse_errors_are_reported_by_stage(wellbore):
    from obdac.errors import StageError
    cspec, _, _ = wellbore
    with pytest.raises(StageError) as info:
        Compiler(cspec).translate("SELECT ?x WHERE { ?x :p/:q ?y }")
    assert info.value.stage == "parse"
