"""Syntax-level normalization into a union of hoisted joins.

Passes, applied bottom-up over any expression tree:

1. flatten and deduplicate unions;
2. distribute a join of leaf unions into a union of leaf joins, within a
   branch budget;
3. drop join combinations whose templates can never build a common term;
4. hoist the term constructors of each combination above a single join of the
   mapping cores, so that joins on terms become joins on attributes;
5. deduplicate the resulting union.
"""

from __future__ import annotations

import itertools
from math import prod

from ..relalg.expr import (Attr, Compare, Difference, Empty, EquiJoin, NaturalJoin, Padding, Project,
                           Rename, Select, Union, UriConstruct, WithCte, conj, infer_types,
                           output_attrs, rename_filter)
from ..template import Template
from .unfold import Leaf, as_leaf, union_of


def join_chain(cores: list, attr_sets: list[set[str]], pairs: list[tuple[str, str]]):
    """Greedy left-deep equi-join of ``cores``; returns (expr, leftover equalities).

    The next core is the first one connected to the joined prefix by some
    equality (a cross join when none is). Equalities whose sides are both
    already joined become leftovers for a selection.
    """
    pending = []
    for a, b in pairs:
        if a != b and (a, b) not in pending and (b, a) not in pending:
            pending.append((a, b))
    expr, have = cores[0], set(attr_sets[0])
    remaining = list(range(1, len(cores)))
    leftovers = [p for p in pending if p[0] in have and p[1] in have]
    pending = [p for p in pending if p not in leftovers]
    while remaining:
        def links(j):
            out = []
            for a, b in pending:
                if a in have and b in attr_sets[j]:
                    out.append((a, b))
                elif b in have and a in attr_sets[j]:
                    out.append((b, a))
            return out
        j = next((j for j in remaining if links(j)), remaining[0])
        conn = links(j)
        used = {frozenset(p) for p in conn}
        pending = [p for p in pending if frozenset(p) not in used]
        expr = EquiJoin(expr, cores[j], tuple(conn))
        have |= attr_sets[j]
        remaining.remove(j)
        inner = [p for p in pending if p[0] in have and p[1] in have]
        leftovers.extend(inner)
        pending = [p for p in pending if p not in inner]
    return expr, leftovers


class _Hoister:
    def __init__(self, schema):
        self.schema = schema
        self._types: dict = {}
        self._attrs: dict = {}

    def types(self, core) -> dict[str, str]:
        hit = self._types.get(core)
        if hit is None:
            hit = self._types[core] = infer_types(core, self.schema)
        return hit

    def attrs(self, core) -> set[str]:
        hit = self._attrs.get(core)
        if hit is None:
            hit = self._attrs[core] = set(output_attrs(core))
        return hit

    def compare(self, t1: Template, ty1: dict, t2: Template, ty2: dict):
        """'prune', 'same', a list of attribute pairs, or 'term' (compare built terms)."""
        k1 = t1.term_kinds([ty1.get(a) for a in t1.attrs])
        k2 = t2.term_kinds([ty2.get(a) for a in t2.attrs])
        if not k1 & k2:
            return "prune"
        if t1.kind == "const" and t2.kind == "const":
            return "same" if t1.value == t2.value else "prune"
        if t1.kind == "iri" and t2.kind == "iri" and t1.segments != t2.segments:
            return "prune"  # distinct IRI templates are assumed to have disjoint ranges
        if t1.kind == t2.kind and t1.kind != "const" and t1.shape == t2.shape:
            if [ty1.get(a) for a in t1.attrs] == [ty2.get(a) for a in t2.attrs]:
                return list(zip(t1.attrs, t2.attrs))
        return "term"

    def hoist(self, leaves: list[Leaf]):
        """One leaf equivalent to the natural join of ``leaves``, or None if it is empty."""
        if len(leaves) == 1:
            return leaves[0]
        seen_core_attrs: set[str] = set()
        for lf in leaves:
            ca = self.attrs(lf.core)
            if ca & seen_core_attrs:
                return "keep"
            seen_core_attrs |= ca
        bindings: dict[str, Template] = {}
        owner: dict[str, dict] = {}
        attrs: list[str] = []
        conds, pairs = [], []
        counter = itertools.count()
        for lf in leaves:
            ty = self.types(lf.core)
            local = {}
            for name, tpl in lf.bindings:
                if name not in bindings:
                    bindings[name], owner[name] = tpl, ty
                    continue
                if name not in lf.attrs or name not in attrs:
                    fresh = f"{name}#{next(counter)}"
                    while fresh in bindings:
                        fresh = f"{name}#{next(counter)}"
                    local[name] = fresh
                    bindings[fresh], owner[fresh] = tpl, ty
                    continue
                verdict = self.compare(bindings[name], owner[name], tpl, ty)
                if verdict == "prune":
                    return None
                if verdict == "same":
                    continue
                if verdict == "term":
                    fresh = f"{name}#{next(counter)}"
                    while fresh in bindings:
                        fresh = f"{name}#{next(counter)}"
                    bindings[fresh], owner[fresh] = tpl, ty
                    conds.append(Compare("=", Attr(name), Attr(fresh)))
                    continue
                pairs.extend(verdict)
            if lf.cond is not None:
                conds.append(rename_filter(lf.cond, local) if local else lf.cond)
            attrs.extend(a for a in lf.attrs if a not in attrs)
        core, leftovers = join_chain([lf.core for lf in leaves], [self.attrs(lf.core) for lf in leaves],
                                     pairs)
        if leftovers:
            core = Select(conj(*(Compare("=", Attr(a), Attr(b)) for a, b in leftovers)), core)
        cond = conj(*conds) if conds else None
        return Leaf(tuple(attrs), cond, tuple(bindings.items()), core)


def _alternatives(expr) -> list | None:
    """Leaves of a leaf, a union of leaves, or an empty relation; None otherwise."""
    if isinstance(expr, Empty):
        return []
    lf = as_leaf(expr)
    if lf is not None:
        return [lf]
    if isinstance(expr, Union):
        out = []
        for c in expr.children:
            lf = as_leaf(c)
            if lf is None:
                return None
            out.append(lf)
        return out
    return None


class StructuralOptimizer:
    def __init__(self, schema, budget: int = 512):
        self.hoister = _Hoister(schema)
        self.budget = budget
        self.diagnostics: list[str] = []
        self._memo: dict = {}

    def __call__(self, expr):
        hit = self._memo.get(expr)
        if hit is None:
            hit = self._memo[expr] = self._opt(expr)
        return hit

    def _opt(self, expr):
        if isinstance(expr, Union):
            kids = [self(c) for c in expr.children]
            return union_of(kids, output_attrs(expr))
        if isinstance(expr, NaturalJoin):
            kids = [self(c) for c in expr.children]
            if any(isinstance(k, Empty) for k in kids):
                return Empty(output_attrs(expr))
            return self._join(kids)
        if isinstance(expr, Select):
            child = self(expr.child)
            return Empty(output_attrs(child)) if isinstance(child, Empty) else Select(expr.cond, child)
        if isinstance(expr, Project):
            child = self(expr.child)
            return Empty(expr.attrs) if isinstance(child, Empty) else Project(expr.attrs, child)
        if isinstance(expr, (Rename, Padding, UriConstruct)):
            child = self(expr.child)
            rebuilt = type(expr)(expr.pairs if isinstance(expr, Rename) else
                                 expr.attrs if isinstance(expr, Padding) else expr.bindings, child)
            return Empty(output_attrs(rebuilt)) if isinstance(child, Empty) else rebuilt
        if isinstance(expr, EquiJoin):
            left, right = self(expr.left), self(expr.right)
            rebuilt = EquiJoin(left, right, expr.pairs)
            if isinstance(left, Empty) or isinstance(right, Empty):
                return Empty(output_attrs(rebuilt))
            return rebuilt
        if isinstance(expr, Difference):
            left, right = self(expr.left), self(expr.right)
            if isinstance(left, Empty) or isinstance(right, Empty):
                return left
            return Difference(left, right)
        if isinstance(expr, WithCte):
            return WithCte(tuple((n, self(e)) for n, e in expr.bindings), self(expr.body))
        return expr

    def _join(self, kids: list):
        if not kids:
            return NaturalJoin(())
        if len(kids) == 1:
            return kids[0]
        alts = [_alternatives(k) for k in kids]
        if any(a is None for a in alts):
            return NaturalJoin(tuple(kids))
        size = prod(len(a) for a in alts)
        attrs = output_attrs(NaturalJoin(tuple(kids)))
        if size > self.budget:
            self.diagnostics.append(
                f"join distribution skipped: {size} branches exceed the budget of {self.budget}")
            return NaturalJoin(tuple(kids))
        branches = []
        for combo in itertools.product(*alts):
            lf = self.hoister.hoist(list(combo))
            if lf is None:
                continue
            if lf == "keep":
                branches.append(NaturalJoin(tuple(c.expr() for c in combo)))
            else:
                branches.append(lf.expr())
        return union_of(branches, attrs)


def structural_optimize(expr, schema, budget: int = 512, diagnostics: list | None = None):
    opt = StructuralOptimizer(schema, budget)
    out = opt(expr)
    if diagnostics is not None:
        diagnostics.extend(opt.diagnostics)
    return out
