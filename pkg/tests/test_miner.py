from obdac.mapping import ConstrainedSpec, Constraints, ObdaSpec, Vfd, parse_constraints, parse_mappings
from obdac.miner import (Context, check_lemma, check_vfd, mine, mine_branching_vfds, mine_exact_predicates, mine_oces,
                         mine_path_vfds, validate_constraints)
from obdac.ontology import parse_ontology
from obdac.relalg import Instance, parse_schema
from obdac.template import Template


def spec_of(schema, ontology, mappings):
    schema = parse_schema(schema)
    maps, prefixes = parse_mappings(mappings, schema)
    return ObdaSpec(parse_ontology(ontology), maps, schema, prefixes)


def names(vfds):
    return {str(v) for v in vfds}


def test_wellbore_constraints_are_mined(wellbore):
    cspec, inst, _ = wellbore
    assert ":Wellbore" in mine_exact_predicates(cspec.spec, inst)
    assert "vfd branching :Wellbore-{} : :completionDate :isInWell" in names(
        mine_branching_vfds(cspec.spec, inst, exact=[":Wellbore"]))
    oces = {str(o) for o in mine_oces(cspec.spec, inst)}
    assert "oce domain :completionDate :Wellbore" in oces


def test_empty_ontology_makes_every_mapped_predicate_exact():
    spec = spec_of("relation r(k int, a int)", "",
                   "map a: :u/{k} a :A <- SELECT k FROM r\nmap p: :u/{k} :p {a} <- SELECT * FROM r")
    inst = Instance(spec.schema, {"r": [(1, 2), (2, 3)]})
    assert mine_exact_predicates(spec, inst) == {":A", ":p"}


def test_subclass_member_breaks_exactness_with_a_witness():
    spec = spec_of("relation r(k int)\nrelation s(k int)",
                   ":A a owl:Class .\n:B a owl:Class .\n:B rdfs:subClassOf :A .",
                   "map a: :u/{k} a :A <- SELECT k FROM r\nmap b: :u/{k} a :B <- SELECT k FROM s")
    inst = Instance(spec.schema, {"r": [(1,)], "s": [(2,)]})
    report = mine(spec, inst)
    assert ":A" not in report.exact and ":B" in report.exact
    rejected = next(f for f in report.rejected if f.constraint == "exact :A")
    assert ":u/2" in rejected.witness


HISTORY = spec_of(
    "relation wb(id text, well text, status text)",
    ":isInWell a owl:ObjectProperty .\n:status a owl:DatatypeProperty .",
    """
map w: :W-{id} :isInWell :Well-{well} <- SELECT * FROM wb WHERE status = 'actual'
map s: :W-{id} :status {status} <- SELECT * FROM wb WHERE status = 'actual'
""")


def test_filtered_fd_holds_despite_raw_violation():
    inst = Instance(HISTORY.schema, {"wb": [("1", "a", "historic"), ("1", "b", "actual")]})
    assert "vfd branching :W-{} : :isInWell :status" in names(mine_branching_vfds(HISTORY, inst))


def test_same_property_mapped_twice_has_no_vfd():
    spec = spec_of("relation t1(x int, y int, z int)",
                   ":p1 a owl:DatatypeProperty .\n:p2 a owl:DatatypeProperty .",
                   """
map a: :s/{x} :p1 {y} <- SELECT * FROM t1
map b: :s/{x} :p1 {z} <- SELECT * FROM t1
map c: :s/{x} :p2 {y} <- SELECT * FROM t1
""")
    inst = Instance(spec.schema, {"t1": [(1, 2, 3)]})
    report = mine(spec, inst)
    assert not any(":p1" in v.properties for v in report.vfds)
    assert any("p1" in f.constraint and f.witness for f in report.rejected)


def test_path_vfd_needs_the_whole_chain():
    # s has two P1 objects but only one of them continues with P2
    spec = spec_of("relation t(s int, o int, o2 int)\nrelation u(o int, o2 int)",
                   ":P1 a owl:ObjectProperty .\n:P2 a owl:ObjectProperty .",
                   """
map a: :s/{s} :P1 :o/{o} <- SELECT s, o FROM t
map b: :o/{o} :P2 :o/{o2} <- SELECT * FROM u
""")
    inst = Instance(spec.schema, {"t": [(1, 10, 20), (1, 11, 20)], "u": [(10, 20)]})
    paths = names(mine_path_vfds(spec, inst))
    assert paths == set()  # satisfied, but the anchor body cannot reproduce the chain
    finding = check_vfd(Context(spec, inst), Vfd("path", Template.iri(":s/{_1}"), (":P1", ":P2")))
    assert "FD holds on the chain join" in " ".join(finding.evidence)
    single = check_vfd(Context(spec, inst), Vfd("path", Template.iri(":s/{_1}"), (":P1",)))
    assert not single.certified and single.witness


def test_friend_age_path_over_a_self_join():
    def friend_spec(age_column):
        return spec_of("relation person(id int, friend int, age int)\nkey person(id)",
                       ":friend a owl:ObjectProperty .\n:age a owl:DatatypeProperty .",
                       f"""
map f: :p/{{id}} :friend :p/{{friend}} <- SELECT a.id AS id, a.friend AS friend, b.age AS {age_column}
    FROM person a JOIN person b ON a.friend = b.id
map g: :p/{{id}} :age {{age}} <- SELECT id, age FROM person WHERE age IS NOT NULL
""")
    rows = {"person": [(1, 2, 30), (2, 3, 40), (3, None, 50)]}
    vfd = Vfd("path", Template.iri(":p/{_1}"), (":friend", ":age"))
    exposed = friend_spec("age")
    inst = Instance(exposed.schema, rows)
    assert str(vfd) in names(mine(exposed, inst).vfds)
    assert check_lemma(exposed, inst, vfd) is None
    hidden = friend_spec("friend_age")
    assert str(vfd) not in names(mine(hidden, inst).vfds)
    assert "does not expose age" in check_lemma(hidden, inst, vfd)


def test_oce_rejection_carries_a_witness():
    spec = spec_of("relation r(k int)\nrelation s(k int, v int)",
                   ":A a owl:Class .\n:p a owl:DatatypeProperty .",
                   "map a: :u/{k} a :A <- SELECT k FROM r\nmap p: :u/{k} :p {v} <- SELECT * FROM s")
    inst = Instance(spec.schema, {"r": [], "s": [(1, 2)]})
    report = validate_constraints(ConstrainedSpec(spec, parse_constraints("oce domain :p :A")), inst)
    assert report.oces == ()
    assert report.rejected[0].witness == "(:u/1)"


def test_mined_constraints_round_trip(wellbore):
    cspec, inst, _ = wellbore
    report = mine(cspec.spec, inst)
    again = validate_constraints(ConstrainedSpec(cspec.spec, report.constraints()), inst)
    assert again.constraints() == report.constraints()
    assert not again.rejected
    assert report.fingerprint == inst.fingerprint()
    assert "instance-certified" in report.constraint_text()


def test_validation_never_certifies_a_broken_exactness():
    spec = spec_of("relation r(k int)\nrelation s(k int)",
                   ":A a owl:Class .\n:B a owl:Class .\n:B rdfs:subClassOf :A .",
                   "map a: :u/{k} a :A <- SELECT k FROM r\nmap b: :u/{k} a :B <- SELECT k FROM s")
    inst = Instance(spec.schema, {"r": [(1,)], "s": [(1,), (9,)]})
    report = validate_constraints(ConstrainedSpec(spec, parse_constraints("exact :A")), inst)
    assert report.exact == ()
    assert ":u/9" in report.rejected[0].witness


def test_empty_constraints_give_an_empty_report(wellbore):
    cspec, inst, _ = wellbore
    report = validate_constraints(ConstrainedSpec(cspec.spec, Constraints()), inst)
    assert report.findings == [] and not report.constraints()


def test_certified_vfds_satisfy_the_lemma(wellbore):
    cspec, inst, _ = wellbore
    report = mine(cspec.spec, inst)
    for vfd in report.vfds:
        assert check_lemma(cspec.spec, inst, vfd, report.exact) is None
