"""Reference semantics of graph patterns over RDF graphs, and the OBDA oracle."""

from __future__ import annotations

from typing import Any, Iterable

from ..mapping.tmappings import virtual_assertions
from ..ontology import saturate_abox
from ..relalg.evaluate import Relation, _compare
from ..terms import sort_key
from .ast import BGP, AndE, Bind, Bound, Cmp, Filter, Join, NotE, Opt, OrE, Query, Union, Var, fmt

Solution = frozenset  # of (Var, term) pairs


def truth(cond, s: dict) -> bool | None:
    """Three-valued truth of a filter under solution ``s``; None is ε."""
    if cond is None:
        return True
    if isinstance(cond, Bound):
        return cond.var in s
    if isinstance(cond, Cmp):
        a = s.get(cond.left) if isinstance(cond.left, Var) else cond.left
        b = s.get(cond.right) if isinstance(cond.right, Var) else cond.right
        if a is None or b is None:
            return None
        return _compare(cond.op, a, b)
    if isinstance(cond, NotE):
        v = truth(cond.item, s)
        return None if v is None else not v
    if isinstance(cond, AndE):
        out = True
        for i in cond.items:
            v = truth(i, s)
            if v is False:
                return False
            if v is None:
                out = None
        return out
    if isinstance(cond, OrE):
        out = False
        for i in cond.items:
            v = truth(i, s)
            if v is True:
                return True
            if v is None:
                out = None
        return out
    raise TypeError(f"not a filter expression: {cond!r}")


def _compatible(a: dict, b: dict) -> bool:
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    return all(big.get(k, v) == v for k, v in small.items())


class _Graph:
    def __init__(self, triples: Iterable[tuple]):
        self.triples = frozenset(triples)
        self.by_pred: dict[Any, list[tuple]] = {}
        for t in self.triples:
            self.by_pred.setdefault(t[1], []).append(t)

    def candidates(self, p) -> Iterable[tuple]:
        return self.triples if isinstance(p, Var) else self.by_pred.get(p, ())


def _match_bgp(bgp: BGP, g: _Graph) -> list[dict]:
    sols = [{}]
    for t in bgp.triples:
        nxt = []
        for s in sols:
            pattern = [s.get(x, x) if isinstance(x, Var) else x for x in (t.s, t.p, t.o)]
            for triple in g.candidates(pattern[1]):
                ext = dict(s)
                ok = True
                for x, v in zip(pattern, triple):
                    if isinstance(x, Var):
                        if ext.setdefault(x, v) != v:
                            ok = False
                            break
                    elif x != v:
                        ok = False
                        break
                if ok:
                    nxt.append(ext)
        sols = nxt
    return sols


def _dedupe(sols: Iterable[dict]) -> list[dict]:
    seen = {}
    for s in sols:
        seen.setdefault(frozenset(s.items()), s)
    return list(seen.values())


def _eval(p, g: _Graph) -> list[dict]:
    if isinstance(p, BGP):
        return _dedupe(_match_bgp(p, g))
    if isinstance(p, Filter):
        return [s for s in _eval(p.pattern, g) if truth(p.cond, s) is True]
    if isinstance(p, Bind):
        return [{**s, p.var: p.value} for s in _eval(p.pattern, g)]
    if isinstance(p, Union):
        return _dedupe(_eval(p.left, g) + _eval(p.right, g))
    if isinstance(p, Join):
        right = _eval(p.right, g)
        return _dedupe({**a, **b} for a in _eval(p.left, g) for b in right if _compatible(a, b))
    if isinstance(p, Opt):
        left, right = _eval(p.left, g), _eval(p.right, g)
        out = []
        for a in left:
            matched = False
            for b in right:
                if _compatible(a, b):
                    m = {**a, **b}
                    if truth(p.cond, m) is True:
                        out.append(m)
                        matched = True
            if not matched:
                out.append(a)
        return _dedupe(out)
    raise TypeError(f"not a graph pattern: {p!r}")


def answer(pattern, graph: Iterable[tuple]) -> frozenset[Solution]:
    """All solution mappings of ``pattern`` over ``graph``."""
    return frozenset(frozenset(s.items()) for s in _eval(pattern, _Graph(graph)))


def project(solutions: Iterable[Solution], variables: Iterable[Var]) -> frozenset[Solution]:
    keep = set(variables)
    return frozenset(frozenset((k, v) for k, v in s if k in keep) for s in solutions)


def query_answer(query: Query, graph: Iterable[tuple]) -> frozenset[Solution]:
    return project(answer(query.pattern, graph), query.answer_vars)


def obda_graph(spec, inst) -> frozenset[tuple]:
    """The saturated virtual RDF graph of ``spec`` over ``inst``."""
    return saturate_abox(spec.ontology, virtual_assertions(spec.mappings, inst))


def oracle_answer(query: Query, spec, inst) -> frozenset[Solution]:
    """Ground truth: the query answered over the saturated virtual graph."""
    return query_answer(query, obda_graph(spec, inst))


def to_relation(solutions: Iterable[Solution], variables: Iterable[Var]) -> Relation:
    """Relational form: one attribute per variable name, null when unbound."""
    variables = tuple(variables)
    rows = set()
    for s in solutions:
        d = dict(s)
        rows.add(tuple(d.get(v) for v in variables))
    return Relation(tuple(v.name for v in variables), frozenset(rows))


def format_solutions(solutions: Iterable[Solution], variables: Iterable[Var]) -> str:
    variables = tuple(variables)
    rel = to_relation(solutions, variables)
    lines = ["\t".join(str(v) for v in variables)]
    for row in sorted(rel.rows, key=lambda r: tuple(sort_key(x) for x in r)):
        lines.append("\t".join(fmt(x) for x in row))
    return "\n".join(lines)
