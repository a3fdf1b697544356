"""Key- and inclusion-based simplification of hoisted leaves.

A leaf core made of base-relation scans, selections, projections and joins is
flattened to a select-project-join block. Two scans of the same relation whose
primary-key (or unique) attributes are equated are the same tuple, so one of
them is dropped. A union branch reading ``R`` is dropped when an inclusion
dependency ``R[X] ⊆ S[Y]`` shows another branch reading ``S`` already yields
its rows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..relalg.expr import (And, Attr, BaseRelation, Compare, Difference, EquiJoin, IsNull,
                           NaturalJoin, Not, Padding, Project, Rename, Select, Union, UriConstruct,
                           WithCte, conj, filter_attrs, output_attrs, rename_filter)
from ..relalg.schema import Schema
from .structural import join_chain
from .unfold import Leaf, as_leaf, union_of


@dataclass
class Block:
    """``scans`` are (ref, relation, attrs); conditions and outputs use ``ref.attr`` names."""

    scans: list[tuple[str, str, tuple[str, ...]]] = field(default_factory=list)
    conds: list = field(default_factory=list)
    out: dict[str, str] = field(default_factory=dict)


def flatten(expr) -> Block | None:
    """Select-project-join block equivalent to ``expr``, or None for other shapes."""
    counter = itertools.count()

    def go(e) -> Block | None:
        if isinstance(e, BaseRelation):
            ref = f"r{next(counter)}"
            return Block([(ref, e.name, e.attrs)], [], {a: f"{ref}.{a}" for a in e.attrs})
        if isinstance(e, Rename):
            b = go(e.child)
            if b is None:
                return None
            mapping = {old: new for new, old in e.pairs}
            b.out = {mapping.get(a, a): r for a, r in b.out.items()}
            return b
        if isinstance(e, Project):
            b = go(e.child)
            if b is None:
                return None
            b.out = {a: b.out[a] for a in e.attrs}
            return b
        if isinstance(e, Select):
            b = go(e.child)
            if b is None:
                return None
            b.conds.extend(_conjuncts(rename_filter(e.cond, b.out)))
            return b
        if isinstance(e, (NaturalJoin, EquiJoin)):
            kids = e.children if isinstance(e, NaturalJoin) else (e.left, e.right)
            parts = [go(k) for k in kids]
            if any(p is None for p in parts) or not parts:
                return None
            acc = parts[0]
            for p in parts[1:]:
                for a in p.out:
                    if a in acc.out:
                        acc.conds.append(Compare("=", Attr(acc.out[a]), Attr(p.out[a])))
                if isinstance(e, EquiJoin):
                    for l, r in e.pairs:
                        acc.conds.append(Compare("=", Attr(acc.out[l]), Attr(p.out[r])))
                acc.scans.extend(p.scans)
                acc.conds.extend(p.conds)
                acc.out.update({a: r for a, r in p.out.items() if a not in acc.out})
            return acc
        return None

    return go(expr)


def _conjuncts(f) -> list:
    if isinstance(f, And):
        return [c for i in f.items for c in _conjuncts(i)]
    return [f]


def _is_attr_eq(c) -> bool:
    return isinstance(c, Compare) and c.op == "=" and isinstance(c.left, Attr) and isinstance(c.right, Attr)


def _not_null_attr(c) -> str | None:
    if isinstance(c, Not) and isinstance(c.item, IsNull) and len(c.item.attrs) == 1:
        return c.item.attrs[0]
    return None


class _Classes:
    def __init__(self, conds):
        self.parent: dict[str, str] = {}
        for c in conds:
            if _is_attr_eq(c):
                self.union(c.left.name, c.right.name)

    def find(self, a: str) -> str:
        while self.parent.get(a, a) != a:
            a = self.parent[a]
        return a

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def merge_self_joins(block: Block, schema: Schema) -> bool:
    """Collapse scans identified through keys; True if anything changed."""
    changed = False
    while True:
        classes = _Classes(block.conds)
        victim = None
        for (i, (ri, rel_i, _)), (j, (rj, rel_j, _)) in itertools.combinations(enumerate(block.scans), 2):
            if rel_i != rel_j or rel_i not in schema.relations:
                continue
            for key in schema.keys(rel_i):
                if all(classes.find(f"{ri}.{a}") == classes.find(f"{rj}.{a}") for a in key):
                    victim = (ri, rj, rel_i)
                    break
            if victim:
                break
        if victim is None:
            return changed
        keep, drop, rel = victim
        changed = True
        mapping = {f"{drop}.{a}": f"{keep}.{a}" for a in schema.attributes(rel)}
        block.scans = [s for s in block.scans if s[0] != drop]
        block.out = {a: mapping.get(r, r) for a, r in block.out.items()}
        pk = {f"{keep}.{a}" for a in schema.primary_keys.get(rel, ())}
        conds = []
        for c in block.conds:
            c = rename_filter(c, mapping)
            if _is_attr_eq(c) and c.left.name == c.right.name:
                if c.left.name in pk:
                    continue
                c = Not(IsNull((c.left.name,)))
            if c not in conds:
                conds.append(c)
        block.conds = conds


def rebuild(block: Block, outputs: list[str]):
    """Expression over ``ref.attr`` names producing ``outputs`` (a list of ref-attrs)."""
    needed = set(outputs)
    for c in block.conds:
        needed |= filter_attrs(c)
    cores, attr_sets = [], []
    for ref, rel, attrs in block.scans:
        used = tuple(a for a in attrs if f"{ref}.{a}" in needed) or attrs[:1]
        cores.append(Rename(tuple((f"{ref}.{a}", a) for a in used), Project(used, BaseRelation(rel, attrs))))
        attr_sets.append({f"{ref}.{a}" for a in used})
    owner = {a: k for k, s in enumerate(attr_sets) for a in s}
    joins, rest = [], []
    for c in block.conds:
        if _is_attr_eq(c) and owner[c.left.name] != owner[c.right.name]:
            joins.append((c.left.name, c.right.name))
        else:
            rest.append(c)
    expr, leftovers = join_chain(cores, attr_sets, joins)
    rest += [Compare("=", Attr(a), Attr(b)) for a, b in leftovers]
    if rest:
        expr = Select(conj(*rest), expr)
    return Project(tuple(dict.fromkeys(outputs)), expr)


class SemanticOptimizer:
    def __init__(self, schema: Schema):
        self.schema = schema
        self._memo: dict = {}

    def __call__(self, expr):
        hit = self._memo.get(expr)
        if hit is None:
            hit = self._memo[expr] = self._opt(expr)
        return hit

    def _opt(self, expr):
        lf = as_leaf(expr)
        if lf is not None:
            return self.leaf(lf).expr()
        if isinstance(expr, Union):
            kids = [self(c) for c in expr.children]
            return union_of(self.subsume(kids), output_attrs(expr))
        if isinstance(expr, NaturalJoin):
            return NaturalJoin(tuple(self(c) for c in expr.children))
        if isinstance(expr, EquiJoin):
            return EquiJoin(self(expr.left), self(expr.right), expr.pairs)
        if isinstance(expr, Difference):
            return Difference(self(expr.left), self(expr.right))
        if isinstance(expr, Select):
            return Select(expr.cond, self(expr.child))
        if isinstance(expr, Project):
            return Project(expr.attrs, self(expr.child))
        if isinstance(expr, Rename):
            return Rename(expr.pairs, self(expr.child))
        if isinstance(expr, Padding):
            return Padding(expr.attrs, self(expr.child))
        if isinstance(expr, UriConstruct):
            return UriConstruct(expr.bindings, self(expr.child))
        if isinstance(expr, WithCte):
            return WithCte(tuple((n, self(e)) for n, e in expr.bindings), self(expr.body))
        return expr

    def leaf(self, lf: Leaf) -> Leaf:
        block = flatten(lf.core)
        if block is None or not merge_self_joins(block, self.schema):
            return lf
        used = list(dict.fromkeys(a for _, t in lf.bindings for a in t.attrs))
        core = rebuild(block, [block.out[a] for a in used])
        bindings = tuple((n, t.rename(block.out)) for n, t in lf.bindings)
        return Leaf(lf.attrs, lf.cond, bindings, core)

    # -- union subsumption through inclusion dependencies ----------------------

    def _single_scan(self, lf: Leaf):
        """(relation, non-null attrs, binding -> relation attrs) for a filter-free single scan."""
        block = flatten(lf.core)
        if block is None or len(block.scans) != 1:
            return None
        ref, rel, _ = block.scans[0]
        nn = set()
        for c in block.conds:
            a = _not_null_attr(c)
            if a is None:
                return None
            nn.add(a.split(".", 1)[1])
        attrs = {}
        for n, t in lf.bindings:
            attrs[n] = tuple(block.out[a].split(".", 1)[1] for a in t.attrs)
        return rel, nn, attrs

    def subsume(self, kids: list) -> list:
        if len(kids) < 2 or not self.schema.inclusion_deps:
            return kids
        info = []
        for k in kids:
            lf = as_leaf(k)
            info.append((lf, self._single_scan(lf) if lf is not None else None))
        dropped: set[int] = set()
        for i, (lf1, s1) in enumerate(info):
            if s1 is None:
                continue
            for j, (lf2, s2) in enumerate(info):
                if i == j or j in dropped or s2 is None:
                    continue
                if self._covers(lf1, s1, lf2, s2):
                    dropped.add(i)
                    break
        return [k for i, k in enumerate(kids) if i not in dropped]

    def _covers(self, lf1: Leaf, s1, lf2: Leaf, s2) -> bool:
        """Whether every row of leaf 1 is also a row of leaf 2."""
        rel1, nn1, attrs1 = s1
        rel2, nn2, attrs2 = s2
        if lf1.attrs != lf2.attrs or lf1.cond != lf2.cond:
            return False
        t1, t2 = dict(lf1.bindings), dict(lf2.bindings)
        if t1.keys() != t2.keys() or any(t1[n].shape != t2[n].shape for n in t1):
            return False
        pairs = {(a, b) for n in t1 for a, b in zip(attrs1[n], attrs2[n])}
        used1 = {a for a, _ in pairs}
        used2 = {b for _, b in pairs}
        if not used1 <= nn1 or not nn2 <= used2:
            return False
        for dep in self.schema.inclusion_deps:
            if dep.relation == rel1 and dep.target == rel2:
                if pairs <= set(zip(dep.attrs, dep.target_attrs)):
                    return True
        return False


def semantic_optimize(expr, schema: Schema):
    return SemanticOptimizer(schema)(expr)
