import pytest

from obdac.errors import ParseError
from obdac.sparql import (BGP, Opt, Query, Var, certain_vars, operator_count, parse_query, pattern_vars,
                          query_answer, rewrite_predicates, truth)
from obdac.sparql.ast import Cmp
from obdac.terms import IRI, RDF_TYPE

A, B, C = IRI(":a"), IRI(":b"), IRI(":c")
P, NAME, AGE = IRI(":p"), IRI(":name"), IRI(":age")
GRAPH = {
    (A, P, B), (B, P, C), (C, P, 1),
    (A, NAME, "ann"), (B, NAME, "bo"),
    (A, AGE, 30), (B, AGE, 7),
    (A, RDF_TYPE, IRI(":K")),
}
x, y, n = Var("x"), Var("y"), Var("n")


def answers(text):
    q = parse_query(text)
    return {tuple(dict(s).get(v) for v in q.answer_vars) for s in query_answer(q, GRAPH)}


def test_bgp_join():
    assert answers("SELECT ?x ?z WHERE { ?x :p ?y . ?y :p ?z }") == {(A, C), (B, 1)}


def test_optional_leaves_unbound():
    got = answers("SELECT ?x ?n WHERE { ?x :p ?y OPTIONAL { ?x :name ?n } }")
    assert got == {(A, "ann"), (B, "bo"), (C, None)}


def test_optional_filter_is_part_of_the_left_join():
    got = answers("SELECT ?x ?g WHERE { ?x :p ?y OPTIONAL { ?x :age ?g FILTER(?g > 10) } }")
    assert got == {(A, 30), (B, None), (C, None)}


def test_union_and_bound():
    got = answers("SELECT ?x WHERE { { ?x a :K } UNION { ?x :p 1 } }")
    assert got == {(A,), (C,)}
    got = answers("SELECT ?x WHERE { ?x :p ?y OPTIONAL { ?x :name ?n } FILTER(!bound(?n)) }")
    assert got == {(C,)}


def test_comparison_of_incompatible_terms_is_an_error_not_false():
    # ?y is an IRI for :a and :b, so ?y < 5 is an error; !(error) stays an error
    assert answers("SELECT ?x WHERE { ?x :p ?y FILTER(!(?y < 5)) }") == set()
    assert answers("SELECT ?x WHERE { ?x :p ?y FILTER(?y < 5 || ?x = :a) }") == {(A,), (C,)}
    assert truth(Cmp("<", x, 5), {x: A}) is None
    assert truth(Cmp("=", x, A), {}) is None


def test_select_star_and_projection():
    q = parse_query("SELECT * WHERE { ?x :p ?y OPTIONAL { ?y :name ?n } }")
    assert q.answer_vars == (n, x, y)
    q = parse_query("SELECT ?y WHERE { ?x :p ?y }")
    assert q.answer_vars == (y,)


def test_pattern_helpers():
    q = parse_query("SELECT * WHERE { ?x :p ?y OPTIONAL { ?y :name ?n } FILTER(bound(?n)) }")
    assert pattern_vars(q.pattern) == {x, y, n}
    # the bound() filter makes ?n certain as well
    assert certain_vars(q.pattern) == {x, y, n}
    assert certain_vars(q.pattern.pattern) == {x, y}
    assert operator_count(q.pattern) == 2


def test_rewrite_predicates_replaces_split_atoms_by_unions():
    q = parse_query("SELECT * WHERE { ?x :p ?y }")
    rewritten = rewrite_predicates(q.pattern, {":p": (":p#1", ":p#2")})
    assert query_answer(Query(rewritten), {(A, IRI(":p#1"), B), (B, IRI(":p#2"), C)}) == \
        query_answer(q, {(A, P, B), (B, P, C)})


def test_prefixed_names_are_kept_verbatim():
    q = parse_query("PREFIX : <http://e/> SELECT ?x WHERE { ?x :p ?y }")
    assert q.pattern == BGP((q.pattern.triples[0],))
    assert q.pattern.triples[0].p == P


@pytest.mark.parametrize("text, what", [
    ("SELECT ?x WHERE { ?x :p/:q ?y }", "property paths"),
    ("SELECT (COUNT(?x) AS ?c) WHERE { ?x :p ?y }", "aggregates"),
    ("SELECT ?x WHERE { { SELECT ?x WHERE { ?x :p ?y } } }", "subqueries"),
])
def test_unsupported_constructs_have_positions(text, what):
    with pytest.raises(ParseError) as info:
        parse_query(text)
    assert what in info.value.message
    assert info.value.line == 1 and info.value.column > 1


def test_optional_keeps_its_condition():
    q = parse_query("SELECT * WHERE { ?x :p ?y OPTIONAL { ?y :age ?g FILTER(?g > 1) } }")
    assert isinstance(q.pattern, Opt) and q.pattern.cond is not None
