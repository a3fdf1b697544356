import pytest

from obdac.errors import ParseError
from obdac.ontology import classify, parse_ontology, saturate_abox
from obdac.template import Template, parse_template
from obdac.terms import IRI, RDF_TYPE, TypedLiteral, less_than, values_equal

ONT = parse_ontology("""
@prefix : <http://example.org/> .
:A a owl:Class .
:B a owl:Class .
:C a owl:Class .
:p a owl:ObjectProperty .
:q a owl:ObjectProperty .
:A rdfs:subClassOf :B .
:B rdfs:subClassOf :C .
:p rdfs:subPropertyOf :q .
:q rdfs:domain :A .
:q rdfs:range :B .
""")


def test_closure_is_reflexive_and_transitive():
    closure = classify(ONT)
    assert closure.subsumed(":A", ":C")
    assert closure.subsumed(":B", ":B")
    assert not closure.subsumed(":C", ":A")
    assert closure.subsumed(":p", ":q")


def test_saturation_applies_every_axiom_kind():
    x, y = IRI(":x"), IRI(":y")
    graph = saturate_abox(ONT, {(x, IRI(":p"), y)})
    assert (x, IRI(":q"), y) in graph
    for cls in (":A", ":B", ":C"):
        assert (x, RDF_TYPE, IRI(cls)) in graph
    assert (y, RDF_TYPE, IRI(":B")) in graph
    assert (y, RDF_TYPE, IRI(":A")) not in graph


@pytest.mark.parametrize("text", [
    ":A owl:inverseOf :B .",
    ":A rdfs:subClassOf [ owl:onProperty :p ] .",
    ":A rdfs:subClassOf :B",
])
def test_unsupported_axioms_are_rejected(text):
    with pytest.raises(ParseError):
        parse_ontology(":A a owl:Class .\n:B a owl:Class .\n" + text)


def test_name_used_as_class_and_property():
    with pytest.raises(ParseError):
        parse_ontology(":A a owl:Class .\n:A a owl:ObjectProperty .")


def test_template_kinds():
    iri = parse_template(":Wellbore-{wellbore_s}")
    assert iri.kind == "iri" and iri.attrs == ("wellbore_s",)
    assert iri.build(["W1"]) == IRI(":Wellbore-W1")
    assert iri.build([None]) is None
    date = parse_template('"{y}-{m}-{d}"^^xsd:date')
    assert date.build([2020, 1, 2]) == TypedLiteral("2020-1-2", "xsd:date")
    assert parse_template("{col}").kind == "column"
    assert parse_template("42").build([]) == 42


def test_template_shapes_and_skeleton():
    a, b = Template.iri(":u/{k}"), Template.iri(":u/{a}")
    assert a.joinable(b)
    assert not a.joinable(Template.iri(":v/{k}"))
    assert a.skeleton() == ":u/{}"
    assert a.may_produce(IRI(":u/3"))
    assert not a.may_produce(IRI(":v/3"))
    assert not a.may_produce(3)


def test_malformed_placeholder():
    with pytest.raises(ParseError):
        parse_template(":u/{k")


def test_iri_is_not_a_string_literal():
    assert IRI("a") != "a"
    assert "a" != IRI("a")
    assert IRI("a") == IRI("a")


def test_comparison_of_mixed_kinds_is_an_error():
    assert values_equal(1, 1)
    assert less_than(1, 2)
    with pytest.raises(TypeError):
        less_than(1, "a")
