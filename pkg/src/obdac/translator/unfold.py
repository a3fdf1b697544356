"""Unfolding of basic graph patterns over basic T-mapping definitions.

A triple pattern unfolds into a union of *leaves*, one per mapping that can
match it. Every leaf has the same shape::

    Project(vars, [Select(term conditions,)] UriConstruct(bindings, core))

where ``core`` reads the mapping body with each template attribute renamed to
``t<i>.<attr>`` (``i`` numbers the triple patterns of the whole query), and
each binding builds one RDF term column from a template over those
attributes. Variable columns are named after the variable; constants and
repeated variables use hidden columns that are compared in the selection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable

from ..mapping.model import PredicateDef
from ..relalg.expr import (Attr, Compare, Const, Empty, NaturalJoin, Project, Rename, Select,
                           Union, UriConstruct, conj, infer_types)
from ..sparql.ast import BGP, Triple, Var
from ..template import Template
from ..terms import IRI, RDF_TYPE


@dataclass(frozen=True)
class Leaf:
    """Decomposed view of a leaf expression."""

    attrs: tuple[str, ...]
    cond: Any
    bindings: tuple[tuple[str, Template], ...]
    core: Any

    def expr(self):
        inner = UriConstruct(self.bindings, self.core)
        if self.cond is not None:
            inner = Select(self.cond, inner)
        return Project(self.attrs, inner)


def as_leaf(expr) -> Leaf | None:
    if not isinstance(expr, Project):
        return None
    inner, cond = expr.child, None
    if isinstance(inner, Select):
        cond, inner = inner.cond, inner.child
    if not isinstance(inner, UriConstruct):
        return None
    return Leaf(expr.attrs, cond, inner.bindings, inner.child)


def union_of(branches: Iterable, attrs: tuple[str, ...]):
    """Union of ``branches`` with duplicates and empty branches dropped."""
    flat: list = []
    for b in branches:
        if isinstance(b, Union):
            flat.extend(b.children)
        elif not isinstance(b, Empty):
            flat.append(b)
    flat = list(dict.fromkeys(flat))
    if not flat:
        return Empty(attrs)
    return flat[0] if len(flat) == 1 else Union(tuple(flat))


def prefixed_core(body, attrs: Iterable[str], prefix: str):
    """Body restricted to ``attrs``, each renamed to ``<prefix>.<attr>``."""
    attrs = tuple(dict.fromkeys(attrs))
    return Rename(tuple((f"{prefix}.{a}", a) for a in attrs), Project(attrs, body))


def build_leaf(terms: tuple, templates: tuple[Template, ...], core, prefix: str,
               types: dict[str, str] | None = None):
    """Leaf matching ``terms`` (vars or constants) against ``templates`` over ``core``.

    Templates are given over the un-prefixed body attributes. Returns None
    when a constant can never be produced by its template.
    """
    ren = lambda t: t.rename({a: f"{prefix}.{a}" for a in t.attrs})  # noqa: E731
    bindings: list[tuple[str, Template]] = []
    conds = []
    seen: dict[str, str] = {}
    for pos, (term, tpl) in enumerate(zip(terms, templates)):
        if isinstance(term, Var):
            if term.name in seen:
                hidden = f"{prefix}#{pos}"
                bindings.append((hidden, ren(tpl)))
                conds.append(Compare("=", Attr(seen[term.name]), Attr(hidden)))
            else:
                seen[term.name] = term.name
                bindings.append((term.name, ren(tpl)))
            continue
        attr_types = [types.get(a, "text") for a in tpl.attrs] if types else None
        if not tpl.may_produce(term, attr_types):
            return None
        if tpl.kind == "const":
            continue
        hidden = f"{prefix}#{pos}"
        bindings.append((hidden, ren(tpl)))
        conds.append(Compare("=", Attr(hidden), Const(term)))
    cond = conj(*conds) if conds else None
    return Leaf(tuple(seen), cond, tuple(bindings), core).expr()


class Unfolder:
    """Unfolds triple patterns of one query; numbering of triples is query-wide."""

    def __init__(self, defs: dict[str, PredicateDef], schema):
        self.defs = defs
        self.schema = schema
        self.counter = 0
        self._types: dict = {}

    def fresh(self) -> int:
        i = self.counter
        self.counter += 1
        return i

    def body_types(self, body) -> dict[str, str]:
        hit = self._types.get(body)
        if hit is None:
            hit = self._types[body] = infer_types(body, self.schema)
        return hit

    def candidates(self, t: Triple) -> list[tuple[PredicateDef, Template]]:
        """Definitions that may match ``t`` with the template of the predicate position."""
        if isinstance(t.p, Var):
            return [(d, Template.constant(RDF_TYPE if d.is_class else IRI(d.original)))
                    for d in self.defs.values()]
        if t.p == RDF_TYPE:
            if isinstance(t.o, Var):
                return [(d, Template.constant(RDF_TYPE)) for d in self.defs.values() if d.is_class]
            d = self.defs.get(str(t.o)) if isinstance(t.o, IRI) else None
            return [(d, Template.constant(RDF_TYPE))] if d is not None and d.is_class else []
        if isinstance(t.p, IRI):
            d = self.defs.get(str(t.p))
            return [(d, Template.constant(t.p))] if d is not None and not d.is_class else []
        return []

    def atom(self, t: Triple):
        """Union of the leaves of one triple pattern (or an empty relation)."""
        index = self.fresh()
        prefix = f"t{index}"
        attrs = tuple(v.name for v in t.vars())
        leaves = []
        for d, p_tpl in self.candidates(t):
            # a class atom naming a split class matches that name, a variable gets the original
            cls = IRI(d.name) if isinstance(t.o, IRI) and str(t.o) == d.name else IRI(d.original)
            for m in d.members:
                o_tpl = m.obj if m.obj is not None else Template.constant(cls)
                templates = (m.subject, p_tpl, o_tpl)
                core = prefixed_core(m.body, m.template_attrs, prefix)
                leaf = build_leaf((t.s, t.p, t.o), templates, core, prefix, self.body_types(m.body))
                if leaf is not None:
                    leaves.append(leaf)
        return union_of(leaves, attrs)

    def block(self, bgp: BGP):
        return join_atoms([self.atom(t) for t in bgp.triples])


def join_atoms(atoms: list):
    return atoms[0] if len(atoms) == 1 else NaturalJoin(tuple(atoms))  # () for the empty BGP

