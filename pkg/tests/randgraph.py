"""Random RDF graphs and graph patterns over a small shared vocabulary."""

from __future__ import annotations

import random

from obdac.sparql.parser import parse_query
from obdac.terms import IRI, RDF_TYPE

NODES = tuple(f"http://g.example/n{i}" for i in range(6))
PREDICATES = tuple(f"http://g.example/p{i}" for i in range(3))
CLASSES = tuple(f"http://g.example/C{i}" for i in range(2))
VARS = ("?a", "?b", "?c", "?d")


def random_graph(rng: random.Random, max_triples: int = 50) -> frozenset:
    triples = set()
    for _ in range(rng.randint(0, max_triples)):
        s = IRI(rng.choice(NODES))
        roll = rng.random()
        if roll < 0.2:
            triples.add((s, RDF_TYPE, IRI(rng.choice(CLASSES))))
        elif roll < 0.7:
            triples.add((s, IRI(rng.choice(PREDICATES)), IRI(rng.choice(NODES))))
        else:
            obj = rng.randrange(4) if rng.random() < 0.7 else rng.choice("xy")
            triples.add((s, IRI(rng.choice(PREDICATES)), obj))
    return frozenset(triples)


def _term(rng: random.Random, pool, constants) -> str:
    return rng.choice(pool) if rng.random() < 0.8 else f"<{rng.choice(constants)}>"


def _triple(rng: random.Random, pool) -> str:
    s = _term(rng, pool, NODES)
    if rng.random() < 0.2:
        return f"{s} a {_term(rng, pool, CLASSES)} ."
    p = f"<{rng.choice(PREDICATES)}>" if rng.random() < 0.9 else rng.choice(pool)
    o = _term(rng, pool, NODES) if rng.random() < 0.8 else str(rng.randrange(4))
    return f"{s} {p} {o} ."


def _bgp(rng: random.Random, pool) -> str:
    return " ".join(_triple(rng, pool) for _ in range(rng.randint(1, 3)))


def _filter(rng: random.Random, pool) -> str:
    a, b = rng.sample(pool, 2)
    return rng.choice((
        f"{a} < {rng.randrange(4)}", f"{a} >= {rng.randrange(4)}", f"{a} = {b}", f"{a} != {b}",
        f"bound({a})", f"!bound({a})", f"{a} = \"x\"", f"({a} < 2 || bound({b}))", f"({a} = {b} && {b} > 0)",
    ))


def _pattern(rng: random.Random, pool, depth: int) -> str:
    if depth == 0 or rng.random() < 0.3:
        return _bgp(rng, pool)
    op = rng.choice(("opt", "union", "filter", "join", "optfilter"))
    left = _pattern(rng, pool, depth - 1)
    if op == "filter":
        return f"{left} FILTER({_filter(rng, pool)})"
    right = _pattern(rng, pool, depth - 1)
    if op == "opt":
        return f"{left} OPTIONAL {{ {right} }}"
    if op == "optfilter":
        return f"{left} OPTIONAL {{ {right} FILTER({_filter(rng, pool)}) }}"
    if op == "union":
        return f"{{ {left} }} UNION {{ {right} }}"
    return f"{{ {left} }} {{ {right} }}"


def random_pattern_query(rng: random.Random, depth: int = 3):
    pool = list(VARS[:rng.randint(2, 4)])
    body = _pattern(rng, pool, depth)
    head = "*" if rng.random() < 0.5 else " ".join(rng.sample(pool, rng.randint(1, len(pool))))
    return parse_query(f"SELECT {head} WHERE {{ {body} }}", "<random>")
