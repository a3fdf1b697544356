"""Random OBDA specifications, instances and queries for property tests.

Generated specifications keep the assumptions the compiler relies on:
templates are injective (integer placeholders, separators that are not
digits) and templates of different shapes never share a prefix, every
property keeps one object kind, and declared keys and inclusion
dependencies hold on the generated instance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from obdac.mapping.model import ConstrainedSpec, ObdaSpec
from obdac.mapping.parse import parse_mappings
from obdac.ontology import parse_ontology
from obdac.relalg.schema import Instance, parse_schema
from obdac.sparql.parser import parse_query

PREFIX = "@prefix : <http://example.org/r#> ."

SCHEMA = """\
relation r0(k int, a int, b int, s text)
key r0(k)
relation r1(k int, a int, b int, s text)
key r1(k)
include r1(k) in r0(k)
relation r2(a int, b int, c int)
"""

# name -> (relation columns usable as placeholders)
INT_COLS = {"r0": ("k", "a", "b"), "r1": ("k", "a", "b"), "r2": ("a", "b", "c")}
# subject/object IRI shapes; one placeholder each except the pair shape
SHAPES = (":u/{%s}", ":v/{%s}", ":w/{%s}_{%s}")


@dataclass
class RandomCase:
    spec: ObdaSpec
    inst: Instance
    texts: dict
    kinds: dict  # property -> "iri" | "int" | "text"


def random_instance(rng: random.Random, schema, max_rows: int = 200, domain: int = 6) -> Instance:
    def val(null_rate=0.1):
        return None if rng.random() < null_rate else rng.randrange(domain)

    def txt():
        return None if rng.random() < 0.1 else rng.choice("xyz")

    budget = rng.randint(3, max_rows // 4)
    keys0 = rng.sample(range(domain * 3), min(domain * 3, rng.randint(1, budget)))
    r0 = [(k, val(), val(), txt()) for k in keys0]
    keys1 = rng.sample(keys0, rng.randint(0, len(keys0)))
    r1 = [(k, val(), val(), txt()) for k in keys1]
    r2 = [(val(), val(), val()) for _ in range(rng.randint(0, budget))]
    return Instance(schema, {"r0": r0, "r1": r1, "r2": r2})


def _body(rng: random.Random) -> tuple[str, tuple[str, ...], tuple[str, ...]]:
    """SQL text, integer output columns and text output columns."""
    choice = rng.random()
    if choice < 0.65:
        rel = rng.choice(("r0", "r1", "r2"))
        sql = f"SELECT * FROM {rel}"
        ints, texts = INT_COLS[rel], ("s",) if rel != "r2" else ()
        conds = []
        if rng.random() < 0.4:
            conds.append(f"{rng.choice(ints)} {rng.choice(('<', '>=', '=', '<>'))} {rng.randrange(6)}")
        if texts and rng.random() < 0.2:
            conds.append(f"s = '{rng.choice('xyz')}'")
        if rng.random() < 0.15:
            conds.append(f"{rng.choice(ints)} IS NOT NULL")
        if conds:
            sql += " WHERE " + " AND ".join(conds)
        return sql, ints, texts
    left, right = rng.choice((("r0", "r1"), ("r0", "r2"), ("r1", "r2")))
    on = "t.k = u.k" if right == "r1" else f"t.{rng.choice(INT_COLS[left])} = u.{rng.choice(INT_COLS[right])}"
    sql = (f"SELECT t.k AS k, t.a AS a, u.b AS b, t.s AS s FROM {left} t JOIN {right} u ON {on}")
    if rng.random() < 0.3:
        sql += f" WHERE u.a < {rng.randrange(6)}"
    return sql, ("k", "a", "b"), ("s",)


def _iri(rng: random.Random, shape: int, ints) -> str:
    if shape == 2:
        return SHAPES[2] % tuple(rng.sample(ints, 2))
    return SHAPES[shape] % rng.choice(ints)


def random_case(rng: random.Random, n_classes: int = 3, n_props: int = 3, max_rows: int = 200,
                multi_template: bool = False, reuse: float = 0.4) -> RandomCase:
    classes = [f":C{i}" for i in range(n_classes)]
    props = [f":P{i}" for i in range(n_props)]
    kinds = {p: rng.choice(("iri", "iri", "int", "text")) for p in props}
    # one home shape per predicate keeps most predicates basic
    home = {p: rng.randrange(3) for p in classes + props}
    obj_home = {p: rng.randrange(3) for p in props}

    lines = [PREFIX]
    count = rng.randint(len(classes) + len(props) - 2, len(classes) + len(props) + 3)
    preds = list(classes + props)
    rng.shuffle(preds)
    shared = []  # (sql, ints, texts, subject) reused so that star VFDs can hold
    for i in range(count):
        pred = preds[i] if i < len(preds) else rng.choice(classes + props)
        if shared and rng.random() < reuse:
            sql, ints, texts, subj = rng.choice(shared)
        else:
            sql, ints, texts = _body(rng)
            shape = home[pred]
            if multi_template and rng.random() < 0.4:
                shape = rng.randrange(3)
            subj = _iri(rng, shape, ints)
            shared.append((sql, ints, texts, subj))
        if pred in classes:
            lines.append(f"map m{i}: {subj} a {pred} <- {sql}")
            continue
        kind = kinds[pred]
        if kind == "iri":
            oshape = obj_home[pred]
            if multi_template and rng.random() < 0.3:
                oshape = rng.randrange(3)
            obj = _iri(rng, oshape, ints)
        elif kind == "text" and texts:
            obj = "{s}"
        elif kind == "text":
            continue  # body has no text column
        else:
            obj = "{%s}" % rng.choice(ints)
        lines.append(f"map m{i}: {subj} {pred} {obj} <- {sql}")
    mappings = "\n".join(lines) + "\n"

    ont = [PREFIX] + [f"{c} a owl:Class ." for c in classes]
    ont += [f"{p} a {'owl:ObjectProperty' if kinds[p] == 'iri' else 'owl:DatatypeProperty'} ." for p in props]
    for i, c in enumerate(classes):
        for d in classes[i + 1:]:
            if rng.random() < 0.3:
                ont.append(f"{c} rdfs:subClassOf {d} .")
    for i, p in enumerate(props):
        for q in props[i + 1:]:
            if kinds[p] == kinds[q] and rng.random() < 0.25:
                ont.append(f"{p} rdfs:subPropertyOf {q} .")
        if rng.random() < 0.3:
            ont.append(f"{p} rdfs:domain {rng.choice(classes)} .")
        if kinds[p] == "iri" and rng.random() < 0.3:
            ont.append(f"{p} rdfs:range {rng.choice(classes)} .")
    ontology = "\n".join(ont) + "\n"

    schema = parse_schema(SCHEMA)
    maps, prefixes = parse_mappings(mappings, schema)
    spec = ObdaSpec(parse_ontology(ontology), maps, schema, prefixes)
    inst = random_instance(rng, schema, max_rows)
    return RandomCase(spec, inst, {"mappings": mappings, "ontology": ontology}, kinds)


# ---------------------------------------------------------------------------
# queries

_VARS = ("?x", "?y", "?z", "?w")


def _triple(rng: random.Random, case: RandomCase, pool) -> tuple[str, dict]:
    """One triple pattern and the kinds of the variables it binds."""
    props = sorted(case.kinds)
    classes = sorted({m.predicate for m in case.spec.mappings if m.is_class} | set(case.spec.ontology.class_names))
    s = pool[0] if rng.random() < 0.5 else rng.choice(pool)
    if classes and rng.random() < 0.35:
        return f"{s} a {rng.choice(classes)} .", {s: "iri"}
    p = rng.choice(props)
    o = rng.choice([v for v in pool if v != s] or pool)
    return f"{s} {p} {o} .", {s: "iri", o: case.kinds[p]}


def _bgp(rng: random.Random, case: RandomCase, pool, size: int) -> tuple[str, dict]:
    parts, kinds = [], {}
    for _ in range(size):
        t, k = _triple(rng, case, pool)
        parts.append(t)
        for v, kind in k.items():
            kinds.setdefault(v, kind)
    return " ".join(parts), kinds


def _filter(rng: random.Random, kinds: dict) -> str | None:
    ints = [v for v, k in kinds.items() if k == "int"]
    texts = [v for v, k in kinds.items() if k == "text"]
    every = sorted(kinds)
    options = []
    if ints:
        v = rng.choice(ints)
        options.append(f"{v} {rng.choice(('<', '<=', '>', '=', '!='))} {rng.randrange(6)}")
    if texts:
        options.append(f"{rng.choice(texts)} = \"{rng.choice('xyz')}\"")
    if every:
        options.append(f"bound({rng.choice(every)})")
        options.append(f"!bound({rng.choice(every)})")
        if len(every) > 1:
            a, b = rng.sample(every, 2)
            options.append(f"{a} = {b}")
    return rng.choice(options) if options else None


def _star(rng: random.Random, case: RandomCase) -> tuple[str, dict]:
    """Two or three distinct properties of ``?x``, sometimes with a type atom."""
    props = rng.sample(sorted(case.kinds), min(len(case.kinds), rng.randint(2, 3)))
    parts = [f"?x {p} ?o{i} ." for i, p in enumerate(props)]
    kinds = {"?x": "iri", **{f"?o{i}": case.kinds[p] for i, p in enumerate(props)}}
    classes = sorted(case.spec.ontology.class_names)
    if classes and rng.random() < 0.5:
        parts.insert(0, f"?x a {rng.choice(classes)} .")
    return " ".join(parts), kinds


def random_query(rng: random.Random, case: RandomCase, max_ops: int = 3, star: bool = False):
    """A SELECT query with at most ``max_ops`` OPTIONAL, UNION, FILTER or join operators."""
    pool = list(_VARS[:rng.randint(2, 4)])
    text, kinds = _star(rng, case) if star else _bgp(rng, case, pool, rng.randint(1, 2))
    ops = rng.randint(0, max_ops)
    for _ in range(ops):
        op = rng.choice(("opt", "union", "filter", "join"))
        if op == "filter":
            f = _filter(rng, kinds)
            if f:
                text = f"{text} FILTER({f})"
            continue
        other, k2 = _bgp(rng, case, pool, rng.randint(1, 2))
        for v, kind in k2.items():
            kinds.setdefault(v, kind)
        if op == "opt":
            text = f"{text} OPTIONAL {{ {other} }}"
        elif op == "union":
            text = f"{{ {text} }} UNION {{ {other} }}"
        else:
            text = f"{{ {text} }} {{ {other} }}"
    head = "*" if rng.random() < 0.5 else " ".join(sorted(rng.sample(sorted(kinds), rng.randint(1, len(kinds)))))
    q = f"SELECT {head} WHERE {{ {text} }}"
    return q, parse_query(q, "<random>", case.spec.prefixes)


def constrained(case: RandomCase, constraints) -> ConstrainedSpec:
    return ConstrainedSpec(case.spec, constraints)
