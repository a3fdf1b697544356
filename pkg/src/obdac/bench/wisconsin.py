"""Wisconsin-style tables and the benchmark scenarios built on them.

Column generation for ``n`` rows, following the original benchmark's
uniform scheme:

* ``unique1`` runs 0..n-1 in order and ``unique2`` is a seeded random
  permutation of 0..n-1 (the primary key);
* ``two``, ``four``, ``ten``, ``twenty`` are ``unique1`` modulo the name;
  ``onepercent``, ``tenpercent``, ``twentypercent``, ``fiftypercent`` are
  ``unique1`` modulo 100, 10, 5 and 2;
* ``unique3`` copies ``unique1``; ``evenonepercent``/``oddonepercent`` are
  ``2 * onepercent`` and ``2 * onepercent + 1``;
* ``stringu1``/``stringu2`` spell ``unique1``/``unique2`` as six letters,
  ``string4`` cycles through ``AAAA``, ``HHHH``, ``OOOO``, ``VVVV``.

Every table of one database gets its own permutation from the same seeded
generator, so a database is a pure function of ``(n, seed)``.

Views ``view<k>`` materialize the join of ``tab1 .. tab<k>`` on ``unique2``.
They keep only the columns the mappings read (``unique2`` plus ``unique1``
and ``unique3`` of every joined table) and declare no key.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..mapping.model import ConstrainedSpec, ObdaSpec
from ..mapping.parse import parse_constraints, parse_mappings
from ..ontology import parse_ontology
from ..relalg.schema import Instance, parse_schema
from ..sparql.ast import Query
from ..sparql.parser import parse_query
from ..translator.options import CompileOptions

WISCONSIN_ATTRS = (
    "unique1", "unique2", "two", "four", "ten", "twenty", "onepercent", "tenpercent",
    "twentypercent", "fiftypercent", "unique3", "evenonepercent", "oddonepercent",
    "stringu1", "stringu2", "string4",
)
_TYPES = {a: "text" if a.startswith("string") else "int" for a in WISCONSIN_ATTRS}
_STRING4 = ("AAAA", "HHHH", "OOOO", "VVVV")

TABLES = 5
MAX_JOIN = 4
PROPERTIES = 3
SELECTIVITIES = (0.001, 0.01, 0.1)
SCENARIOS = ("K1", "K2", "K3", "E0", "E1", "E2", "E3")
EXACT_SETS = {
    "E0": (),
    "E1": (":A1", ":A2"),
    "E2": (":A1", ":A2", ":A3"),
    "E3": (":A1", ":A2", ":A3", ":A4"),
}
PREFIXES = "@prefix : <http://example.org/wisconsin#> .\n"


def letters(value: int, width: int = 6) -> str:
    """``value`` in base 26 over A..Z, left-padded with A."""
    out = []
    for _ in range(width):
        value, r = divmod(value, 26)
        out.append(chr(ord("A") + r))
    return "".join(reversed(out))


def wisconsin_rows(n: int, rng: random.Random) -> list[tuple]:
    perm = list(range(n))
    rng.shuffle(perm)
    rows = []
    for u1 in range(n):
        u2 = perm[u1]
        one = u1 % 100
        rows.append((u1, u2, u1 % 2, u1 % 4, u1 % 10, u1 % 20, one, u1 % 10, u1 % 5, u1 % 2,
                     u1, 2 * one, 2 * one + 1, letters(u1), letters(u2), _STRING4[u1 % 4]))
    return rows


def view_attrs(k: int) -> tuple[str, ...]:
    return ("unique2",) + tuple(f"{c}_{j}" for j in range(1, k + 1) for c in ("unique1", "unique3"))


def schema_text() -> str:
    cols = ", ".join(f"{a} {_TYPES[a]}" for a in WISCONSIN_ATTRS)
    lines = ["# Wisconsin tables keyed on unique2; views materialize joins and have no key."]
    for i in range(1, TABLES + 1):
        lines.append(f"relation tab{i}({cols})")
        lines.append(f"key tab{i}(unique2)")
    for k in range(1, MAX_JOIN + 1):
        lines.append(f"relation view{k}({', '.join(a + ' int' for a in view_attrs(k))})")
    return "\n".join(lines) + "\n"


def generate(n: int, seed: int, relations=None) -> dict[str, list[tuple]]:
    """Rows per relation; ``relations`` limits which tables and views are kept."""
    rng = random.Random(seed)
    tables = {f"tab{i}": wisconsin_rows(n, rng) for i in range(1, TABLES + 1)}
    by_key = {name: {r[1]: r for r in rows} for name, rows in tables.items()}
    data = dict(tables)
    for k in range(1, MAX_JOIN + 1):
        name = f"view{k}"
        if relations is not None and name not in relations:
            continue
        rows = []
        for key in sorted(by_key["tab1"]):
            row = [key]
            for j in range(1, k + 1):
                t = by_key[f"tab{j}"][key]
                row += [t[0], t[10]]
            rows.append(tuple(row))
        data[name] = rows
    if relations is not None:
        data = {r: rows for r, rows in data.items() if r in relations}
    return data


# ---------------------------------------------------------------------------
# scenario specifications

def _join_sql(n: int, select: str) -> str:
    body = f"SELECT {select} FROM tab1 t1"
    for j in range(2, n + 1):
        body += f" JOIN tab{j} t{j} ON t1.unique2 = t{j}.unique2"
    return body


def _vfd_mappings(tables: bool) -> str:
    lines = [PREFIXES.strip()]
    for n in range(1, MAX_JOIN + 1):
        if tables:
            cls_body = _join_sql(n, "t1.unique2 AS unique2")
            prop_body = _join_sql(n, f"t1.unique2 AS unique2, t{n}.unique1 AS unique1_{n}, "
                                     f"t{n}.unique3 AS unique3_{n}")
        else:
            cls_body = prop_body = f"SELECT * FROM view{n}"
        lines.append(f"map class{n}: :ind-{{unique2}} a :Class-{n} <- {cls_body}")
        objects = (f"{{unique1_{n}}}", f"{{unique3_{n}}}", "{unique2}")
        for i, obj in enumerate(objects, 1):
            lines.append(f"map p{i}_{n}: :ind-{{unique2}} :Property{i}-{n} {obj} <- {prop_body}")
    return "\n".join(lines) + "\n"


def _vfd_ontology() -> str:
    lines = [PREFIXES.strip()]
    for n in range(1, MAX_JOIN + 1):
        lines.append(f":Class-{n} a owl:Class .")
        lines += [f":Property{i}-{n} a owl:DatatypeProperty ." for i in range(1, PROPERTIES + 1)]
    return "\n".join(lines) + "\n"


def _vfd_constraints() -> str:
    lines = []
    for n in range(1, MAX_JOIN + 1):
        props = " ".join(f":Property{i}-{n}" for i in range(1, PROPERTIES + 1))
        lines.append(f"vfd branching :ind-{{}} : {props}")
        lines += [f"oce domain :Property{i}-{n} :Class-{n}" for i in range(1, PROPERTIES + 1)]
    return "\n".join(lines) + "\n"


def _vfd_queries(n_rows: int) -> dict[str, str]:
    out = {}
    for m in range(1, PROPERTIES + 1):
        for n in range(1, MAX_JOIN + 1):
            for s in SELECTIVITIES:
                k = max(1, int(n_rows * s))
                atoms = " ".join(f"?x :Property{i}-{n} ?y{i} ." for i in range(1, m + 1))
                out[f"q{m}/{n}@{s:g}"] = (f"SELECT ?x ?y{m} WHERE {{ ?x a :Class-{n} . {atoms} "
                                          f"FILTER(?y{m} < {k}) }}")
    return out


def _exact_mappings(n_rows: int) -> str:
    lines = [PREFIXES.strip()]
    for i in range(1, 5):
        bound = n_rows * i // 4
        lines.append(f"map a{i}: :ind-{{unique2}} a :A{i} <- SELECT unique2 FROM tab{i} WHERE unique2 < {bound}")
    lines.append("map r: :ind-{unique2} :R :ind-{unique1} <- SELECT unique2, unique1 FROM tab5")
    lines.append("map s: :ind-{unique2} :S {unique1} <- SELECT unique2, unique1 FROM tab5")
    return "\n".join(lines) + "\n"


def _exact_ontology() -> str:
    return PREFIXES + "\n".join([
        ":A1 a owl:Class .", ":A2 a owl:Class .", ":A3 a owl:Class .", ":A4 a owl:Class .",
        ":R a owl:ObjectProperty .", ":S a owl:DatatypeProperty .",
        ":A1 rdfs:subClassOf :A2 .", ":A2 rdfs:subClassOf :A3 .", ":A3 rdfs:subClassOf :A4 .",
    ]) + "\n"


EXACT_QUERIES = {
    "q1": "SELECT * WHERE { ?x a :A2 . ?x :S ?u . }",
    "q2": "SELECT * WHERE { ?x a :A3 . ?x :R ?y . }",
    "q3": "SELECT * WHERE { ?x a :A3 . ?x :R ?y . ?y a :A4 . OPTIONAL { ?x :S ?u . } OPTIONAL { ?y :S ?v . } }",
    "q4": "SELECT * WHERE { ?x a :A4 . ?x :R ?y . ?y a :A4 . OPTIONAL { ?x :S ?u . } OPTIONAL { ?y :S ?v . } }",
    "q5": "SELECT * WHERE { ?x a :A3 . ?x :R ?y . ?y a :A3 . ?y :R ?z . ?z a :A4 . }",
    "q6": "SELECT * WHERE { ?x a :A4 . ?x :R ?y . ?y a :A4 . ?y :R ?z . ?z a :A4 . OPTIONAL { ?z :S ?w . } }",
}


@dataclass
class Scenario:
    """One benchmark setting: specification, queries and compile options."""

    name: str
    cspec: ConstrainedSpec
    queries: dict[str, Query]
    options: CompileOptions
    relations: tuple[str, ...]
    texts: dict[str, str] = field(default_factory=dict)

    def instance(self, n: int, seed: int) -> Instance:
        return Instance(self.cspec.spec.schema, generate(n, seed, set(self.relations)))


def scenario(name: str, n_rows: int) -> Scenario:
    """The specification of scenario ``name`` for tables of ``n_rows`` rows.

    K1 maps classes and properties onto joins of keyed tables, K2 and K3 onto
    keyless materialized views; K2 declares VFDs over the views and K3
    declares none and runs with the VFD rewrite off.
    E0 to E3 declare growing sets of exact classes in a four-level hierarchy.
    """
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose one of {', '.join(SCENARIOS)}")
    schema = parse_schema(schema_text(), "<wisconsin schema>")
    if name.startswith("K"):
        ontology = _vfd_ontology()
        mappings = _vfd_mappings(tables=name == "K1")
        constraints = _vfd_constraints() if name == "K2" else ""
        queries = _vfd_queries(n_rows)
        options = CompileOptions(vfd=name != "K3")
        relations = tuple(f"tab{i}" for i in range(1, MAX_JOIN + 1)) if name == "K1" else \
            tuple(f"view{k}" for k in range(1, MAX_JOIN + 1))
    else:
        ontology = _exact_ontology()
        mappings = _exact_mappings(n_rows)
        constraints = "".join(f"exact {c}\n" for c in EXACT_SETS[name])
        queries = dict(EXACT_QUERIES)
        options = CompileOptions()
        relations = tuple(f"tab{i}" for i in range(1, TABLES + 1))
    ont = parse_ontology(ontology, "<wisconsin ontology>")
    maps, prefixes = parse_mappings(mappings, schema, "<wisconsin mappings>")
    spec = ObdaSpec(ont, maps, schema, prefixes)
    cspec = ConstrainedSpec(spec, parse_constraints(constraints, "<wisconsin constraints>", prefixes))
    parsed = {q: parse_query(text, q, prefixes) for q, text in queries.items()}
    texts = {"schema.txt": schema_text(), "ontology.ttl": ontology, "mappings.txt": mappings,
             "constraints.txt": constraints}
    return Scenario(name, cspec, parsed, options, relations, texts)
