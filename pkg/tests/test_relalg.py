import pytest

from obdac.errors import ParseError, SchemaError
from obdac.relalg import (Attr, BaseRelation, Compare, Const, Difference, Empty, EquiJoin, Evaluator,
                          Instance, IsNull, NaturalJoin, Not, Or, Padding, Project, Rename, Select,
                          Union, check_containment, check_fd, conj, containment_witness, count_joins,
                          count_scans, count_unions, eq, fd_violation, load_instance, not_null,
                          output_attrs, parse_schema, relation, union_branches, write_instance)

SCHEMA = parse_schema("""
relation emp(id int, name text, dept int)
key emp(id)
relation dept(id int, title text)
include emp(dept) in dept(id)
""")


@pytest.fixture
def inst():
    return Instance(SCHEMA, {
        "emp": [(1, "ann", 10), (2, "bo", 10), (3, "cy", None)],
        "dept": [(10, "ops"), (20, "lab")],
    })


EMP = BaseRelation("emp", ("id", "name", "dept"))
DEPT = BaseRelation("dept", ("id", "title"))


def test_schema_parse():
    assert SCHEMA.relations["emp"] == ("id", "name", "dept")
    assert SCHEMA.primary_keys["emp"] == ("id",)
    assert SCHEMA.types["dept"]["title"] == "text"
    assert len(SCHEMA.inclusion_deps) == 1


def test_schema_parse_errors():
    with pytest.raises(ParseError):
        parse_schema("relation r(a int)\nrelation r(b int)")
    with pytest.raises(ParseError):
        parse_schema("relation r(a int)\nkey r(b)")
    with pytest.raises(ParseError):
        parse_schema("this is not a schema line")


def test_instance_rejects_unknown_relation():
    with pytest.raises(SchemaError):
        Instance(SCHEMA, {"nope": [(1,)]})


def test_select_is_three_valued(inst):
    ev = Evaluator(inst)
    low = Select(Compare("<", Attr("dept"), Const(15)), EMP)
    assert {r[0] for r in ev(low).rows} == {1, 2}
    # NOT of an unknown comparison stays unknown, so the null row is dropped
    high = Select(Not(Compare("<", Attr("dept"), Const(15))), EMP)
    assert ev(high).rows == frozenset()
    nulls = Select(IsNull(("dept",)), EMP)
    assert {r[0] for r in ev(nulls).rows} == {3}
    either = Select(Or((IsNull(("dept",)), eq("id", 1, const=True))), EMP)
    assert {r[0] for r in ev(either).rows} == {1, 3}


def test_project_rename_join(inst):
    ev = Evaluator(inst)
    d = Rename((("dept", "id"),), DEPT)
    joined = NaturalJoin((EMP, d))
    assert output_attrs(joined) == ("id", "name", "dept", "title")
    assert {(r[1], r[3]) for r in ev(joined).rows} == {("ann", "ops"), ("bo", "ops")}
    names = Project(("name",), joined)
    assert ev(names).rows == {("ann",), ("bo",)}


def test_natural_join_never_matches_null(inst):
    ev = Evaluator(inst)
    d = Rename((("dept", "id"), ("label", "title")), DEPT)
    padded = Padding(("dept",), Project(("label",), d))
    assert ev(NaturalJoin((Project(("id", "dept"), EMP), padded))).rows == frozenset()


def test_equijoin(inst):
    ev = Evaluator(inst)
    d = Rename((("did", "id"),), DEPT)
    expr = EquiJoin(EMP, d, (("dept", "did"),))
    assert len(ev(expr)) == 2


def test_union_difference_empty(inst):
    ev = Evaluator(inst)
    ids = Project(("id",), EMP)
    dids = Project(("id",), DEPT)
    assert len(ev(Union((ids, dids)))) == 5
    assert ev(Difference(ids, Select(eq("id", 1, const=True), ids))).rows == {(2,), (3,)}
    assert ev(Empty(("id",))).rows == frozenset()


def test_filtered_join_matches_cross_product(inst):
    ev = Evaluator(inst)
    d = Rename((("did", "id"),), DEPT)
    cond = conj(eq("dept", "did"), Compare("!=", Attr("name"), Const("bo")))
    fast = ev(Select(cond, NaturalJoin((EMP, d))))
    assert fast.rows == {(1, "ann", 10, 10, "ops")}


def test_operator_counts():
    expr = Union((NaturalJoin((EMP, DEPT)), Project(("id",), Select(not_null("id"), EMP))))
    assert count_joins(expr) == 1
    assert count_unions(expr) == 1
    assert union_branches(expr) == 2
    assert count_scans(expr, "emp") == 2
    assert count_scans(expr) == 3


def test_fd_and_containment():
    r = relation(("a", "b"), [(1, 2), (1, 3), (2, 2)])
    assert not check_fd(r, ["a"], ["b"])
    assert fd_violation(r, ["a"], ["b"]) is not None
    assert check_fd(r, ["a", "b"], ["b"])
    s = relation(("x",), [(1,), (2,)])
    assert check_containment(_column(r, "a"), s, {"a": "x"})
    assert containment_witness(s, relation(("x",), [(1,)]), {"x": "x"}) == (2,)


def _column(r, attr):
    i = r.attrs.index(attr)
    return relation((attr,), {(row[i],) for row in r.rows})


def test_same_as_ignores_attribute_order():
    a = relation(("x", "y"), [(1, 2)])
    b = relation(("y", "x"), [(2, 1)])
    assert a.same_as(b)
    assert not a.same_as(relation(("x", "z"), [(1, 2)]))


def test_csv_round_trip(tmp_path, inst):
    write_instance(inst, tmp_path)
    back = load_instance(SCHEMA, tmp_path)
    assert back.relation("emp").rows == inst.relation("emp").rows
