"""Sharing repeated optimizing bodies through WITH bindings."""

from __future__ import annotations

from collections import Counter

from ..relalg.expr import (CteRef, Difference, EquiJoin, NaturalJoin, Padding, Project, Rename, Select,
                           Union, UriConstruct, WithCte, output_attrs, walk)


def share_bodies(expr, bodies: dict):
    """Replace every body of ``bodies`` (expr -> name) used at least twice by a named reference."""
    counts = Counter(n for n in walk(expr) if n in bodies)
    shared = {b: bodies[b] for b, k in counts.items() if k >= 2}
    if not shared:
        return expr
    refs = {b: CteRef(name, output_attrs(b)) for b, name in shared.items()}
    memo: dict = {}

    def sub(e):
        if e in refs:
            return refs[e]
        hit = memo.get(e)
        if hit is not None:
            return hit
        if isinstance(e, (Select, Project, Rename, Padding, UriConstruct)):
            field = {Select: "cond", Project: "attrs", Rename: "pairs", Padding: "attrs",
                     UriConstruct: "bindings"}[type(e)]
            out = type(e)(getattr(e, field), sub(e.child))
        elif isinstance(e, (NaturalJoin, Union)):
            out = type(e)(tuple(sub(c) for c in e.children))
        elif isinstance(e, EquiJoin):
            out = EquiJoin(sub(e.left), sub(e.right), e.pairs)
        elif isinstance(e, Difference):
            out = Difference(sub(e.left), sub(e.right))
        elif isinstance(e, WithCte):
            out = WithCte(tuple((n, sub(b)) for n, b in e.bindings), sub(e.body))
        else:
            out = e
        memo[e] = out
        return out

    bindings = tuple(sorted(((name, b) for b, name in shared.items()), key=lambda x: x[0]))
    return WithCte(bindings, sub(expr))
