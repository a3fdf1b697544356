"""Translation of graph patterns into relational algebra.

Every variable becomes an attribute named after it, holding RDF terms, with
null standing for "unbound". Basic graph patterns are delegated to a
callback, so the same translation serves both the triple-table semantics
and the mapping-based unfolding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

from ..relalg.expr import (And, Attr, BaseRelation, Compare, Const, Difference, IsNull, NaturalJoin,
                           Not, Or, Padding, Project, Rename, Select, Union, UriConstruct, conj,
                           not_null)
from ..relalg.schema import Instance, Schema
from ..sparql.ast import (BGP, AndE, Bind, Bound, Cmp, Filter, Join, NotE, Opt, OrE, Query,
                          Triple, Var, certain_vars)
from ..sparql.ast import Union as PUnion
from ..template import Template

TRIPLE = "triple"
TRIPLE_ATTRS = ("subj", "pred", "obj")


@dataclass(frozen=True)
class Part:
    """A translated pattern with its attribute list and always-bound variables."""

    expr: object
    attrs: tuple[str, ...]
    certain: frozenset[str]


def translate_filter(cond, scope) -> object:
    """Relational form of a filter; variables outside ``scope`` are unbound."""
    if isinstance(cond, Cmp):
        def side(x):
            if isinstance(x, Var):
                return Attr(x.name) if x.name in scope else Const(None)
            return Const(x)
        return Compare(cond.op, side(cond.left), side(cond.right))
    if isinstance(cond, Bound):
        return Not(IsNull((cond.var.name,))) if cond.var.name in scope else Or(())
    if isinstance(cond, NotE):
        return Not(translate_filter(cond.item, scope))
    if isinstance(cond, AndE):
        return And(tuple(translate_filter(i, scope) for i in cond.items))
    if isinstance(cond, OrE):
        return Or(tuple(translate_filter(i, scope) for i in cond.items))
    raise TypeError(f"not a filter expression: {cond!r}")


def _subsets(items):
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)


def _restrict(part: Part, null: tuple[str, ...], bound: tuple[str, ...] = ()) -> Part:
    """Rows of ``part`` where ``null`` are unbound (and ``bound`` bound), minus ``null``."""
    if not null and not bound:
        return part
    cond = conj(*([IsNull(null)] if null else []), *([not_null(*bound)] if bound else []))
    keep = tuple(a for a in part.attrs if a not in null)
    return Part(Project(keep, Select(cond, part.expr)), keep, part.certain | frozenset(bound))


def _filter(part: Part, cond) -> Part:
    if cond is None:
        return part
    return Part(Select(translate_filter(cond, set(part.attrs)), part.expr), part.attrs, part.certain)


def join_parts(left: Part, right: Part) -> Part:
    """Compatible-mapping join: a union over which shared variables are unbound on each side."""
    shared = [a for a in left.attrs if a in right.attrs]
    maybe_l = [a for a in shared if a not in left.certain]
    maybe_r = [a for a in shared if a not in right.certain]
    branches = []
    for nl in _subsets(maybe_l):
        for nr in _subsets(maybe_r):
            if set(nl) & set(nr):
                continue
            branches.append(NaturalJoin((_restrict(left, nl).expr, _restrict(right, nr).expr)))
    attrs = left.attrs + tuple(a for a in right.attrs if a not in left.attrs)
    expr = branches[0] if len(branches) == 1 else Union(tuple(branches))
    return Part(expr, attrs, left.certain | right.certain)


def union_parts(left: Part, right: Part) -> Part:
    attrs = left.attrs + tuple(a for a in right.attrs if a not in left.attrs)

    def pad(p: Part):
        missing = tuple(a for a in attrs if a not in p.attrs)
        return Padding(missing, p.expr) if missing else p.expr
    return Part(Union((pad(left), pad(right))), attrs, left.certain & right.certain)


def optional_parts(left: Part, right: Part, cond) -> Part:
    """Left-outer join with filter: matched rows plus the padded unmatched left rows."""
    joined = _filter(join_parts(left, right), cond)
    shared = [a for a in left.attrs if a in right.attrs]
    maybe = [a for a in shared if a not in left.certain]
    matched = []
    for null in _subsets(maybe):
        bound = tuple(a for a in maybe if a not in null)
        lv = _restrict(left, null, bound)
        j = _filter(join_parts(lv, right), cond)
        m = Project(lv.attrs, j.expr)
        matched.append(Padding(null, m) if null else m)
    rest = Difference(left.expr, matched[0] if len(matched) == 1 else Union(tuple(matched)))
    extra = tuple(a for a in right.attrs if a not in left.attrs)
    unmatched = Padding(extra, rest) if extra else rest
    return Part(Union((joined.expr, unmatched)), joined.attrs, left.certain)


def bgp_attrs(bgp: BGP) -> tuple[str, ...]:
    return tuple(dict.fromkeys(v.name for t in bgp.triples for v in t.vars()))


def tau(pattern, bgp: Callable[[BGP], object]) -> Part:
    """Translate ``pattern``, compiling each basic graph pattern with ``bgp``."""
    if isinstance(pattern, BGP):
        attrs = bgp_attrs(pattern)
        return Part(bgp(pattern), attrs, frozenset(attrs))
    if isinstance(pattern, Filter):
        inner = tau(pattern.pattern, bgp)
        certain = frozenset(v.name for v in certain_vars(pattern)) & frozenset(inner.attrs)
        return Part(_filter(inner, pattern.cond).expr, inner.attrs, certain)
    if isinstance(pattern, Bind):
        inner = tau(pattern.pattern, bgp)
        name = pattern.var.name
        return Part(UriConstruct(((name, Template.constant(pattern.value)),), inner.expr),
                    inner.attrs + (name,), inner.certain | {name})
    if isinstance(pattern, PUnion):
        return union_parts(tau(pattern.left, bgp), tau(pattern.right, bgp))
    if isinstance(pattern, Join):
        return join_parts(tau(pattern.left, bgp), tau(pattern.right, bgp))
    if isinstance(pattern, Opt):
        return optional_parts(tau(pattern.left, bgp), tau(pattern.right, bgp), pattern.cond)
    raise TypeError(f"not a graph pattern: {pattern!r}")


def answer_expr(query: Query, part: Part):
    """Project the translation onto the answer variables, padding absent ones with nulls."""
    names = tuple(v.name for v in query.answer_vars)
    missing = tuple(n for n in names if n not in part.attrs)
    expr = Padding(missing, part.expr) if missing else part.expr
    return Project(names, expr)


# ---------------------------------------------------------------------------
# Triple-table semantics

def triple_pattern(t: Triple, index: int = 0):
    """One triple pattern as a selection over the ternary ``triple`` relation."""
    conds, names = [], {}
    for attr, term in zip(TRIPLE_ATTRS, (t.s, t.p, t.o)):
        if isinstance(term, Var):
            if term.name in names:
                conds.append(Compare("=", Attr(names[term.name]), Attr(attr)))
            else:
                names[term.name] = attr
        else:
            conds.append(Compare("=", Attr(attr), Const(term)))
    expr = BaseRelation(TRIPLE, TRIPLE_ATTRS)
    if conds:
        expr = Select(conj(*conds), expr)
    pairs = tuple((v, a) for v, a in names.items())
    return Rename(pairs, Project(tuple(a for _, a in pairs), expr))


def triple_bgp(bgp: BGP):
    return NaturalJoin(tuple(triple_pattern(t, i) for i, t in enumerate(bgp.triples)))


def triple_translation(query: Query):
    """Relational translation of ``query`` over the triple table."""
    return answer_expr(query, tau(query.pattern, triple_bgp))


def triple_instance(graph) -> Instance:
    schema = Schema({TRIPLE: TRIPLE_ATTRS})
    return Instance(schema, {TRIPLE: [tuple(t) for t in graph]})
