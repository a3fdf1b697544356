"""Set-semantics evaluation of relational expressions with three-valued filters."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping

from ..errors import PlanError, SchemaError
from ..terms import ComparisonError, less_than, row_key, values_equal
from .expr import (And, Attr, BaseRelation, Compare, Const, CteRef, Difference, Empty, EquiJoin,
                   IsNull, NaturalJoin, Not, Or, Padding, Project, Rename, Select, Union,
                   UriConstruct, WithCte, output_attrs)


@dataclass(frozen=True)
class Relation:
    attrs: tuple[str, ...]
    rows: frozenset

    def __len__(self) -> int:
        return len(self.rows)

    def reorder(self, attrs: Iterable[str]) -> "Relation":
        attrs = tuple(attrs)
        if attrs == self.attrs:
            return self
        if set(attrs) != set(self.attrs) or len(attrs) != len(self.attrs):
            raise SchemaError(f"cannot reorder {self.attrs} as {attrs}")
        idx = [self.attrs.index(a) for a in attrs]
        return Relation(attrs, frozenset(tuple(r[i] for i in idx) for r in self.rows))

    def as_dicts(self) -> list[dict[str, Any]]:
        return [dict(zip(self.attrs, r)) for r in self.sorted_rows()]

    def sorted_rows(self) -> list[tuple]:
        return sorted(self.rows, key=row_key)

    def same_as(self, other: "Relation") -> bool:
        """Equality up to attribute order."""
        if set(self.attrs) != set(other.attrs):
            return False
        return self.rows == other.reorder(self.attrs).rows


def relation(attrs: Iterable[str], rows: Iterable[Iterable[Any]]) -> Relation:
    return Relation(tuple(attrs), frozenset(tuple(r) for r in rows))


# ---------------------------------------------------------------------------
# Three-valued filters compiled to closures over tuple positions

def _operand(x, pos: Mapping[str, int]) -> Callable[[tuple], Any]:
    if isinstance(x, Attr):
        try:
            i = pos[x.name]
        except KeyError:
            raise SchemaError(f"unknown attribute {x.name!r} in filter") from None
        return lambda row: row[i]
    if isinstance(x, Const):
        v = x.value
        return lambda row: v
    raise PlanError(f"bad filter operand {x!r}")


def _compare(op: str, a: Any, b: Any) -> bool | None:
    """Comparison of two non-null values; ordering mixed kinds gives ε (None)."""
    try:
        return _compare_strict(op, a, b)
    except ComparisonError:
        return None


def _compare_strict(op: str, a: Any, b: Any) -> bool:
    if op == "=":
        return values_equal(a, b)
    if op == "!=":
        return not values_equal(a, b)
    if op == "<":
        return less_than(a, b)
    if op == ">":
        return less_than(b, a)
    if op == "<=":
        return values_equal(a, b) or less_than(a, b)
    if op == ">=":
        return values_equal(a, b) or less_than(b, a)
    raise PlanError(f"unknown comparison {op!r}")


def compile_filter(f, attrs: tuple[str, ...]) -> Callable[[tuple], bool | None]:
    """Return ``row -> True | False | None`` where None stands for ε."""
    pos = {a: i for i, a in enumerate(attrs)}
    return _compile(f, pos)


def _compile(f, pos):
    if isinstance(f, IsNull):
        try:
            idx = [pos[a] for a in f.attrs]
        except KeyError as exc:
            raise SchemaError(f"unknown attribute {exc.args[0]!r} in filter") from None
        return lambda row: all(row[i] is None for i in idx)
    if isinstance(f, Compare):
        left, right, op = _operand(f.left, pos), _operand(f.right, pos), f.op

        def cmp(row):
            a, b = left(row), right(row)
            if a is None or b is None:
                return None
            return _compare(op, a, b)
        return cmp
    if isinstance(f, And):
        parts = [_compile(i, pos) for i in f.items]

        def conj(row):
            result = True
            for p in parts:
                v = p(row)
                if v is False:
                    return False
                if v is None:
                    result = None
            return result
        return conj
    if isinstance(f, Or):
        parts = [_compile(i, pos) for i in f.items]

        def disj(row):
            result = False
            for p in parts:
                v = p(row)
                if v is True:
                    return True
                if v is None:
                    result = None
            return result
        return disj
    if isinstance(f, Not):
        inner = _compile(f.item, pos)

        def neg(row):
            v = inner(row)
            return None if v is None else not v
        return neg
    raise PlanError(f"not a filter: {f!r}")


# ---------------------------------------------------------------------------

class Evaluator:
    """Evaluates expressions over one instance.

    With ``share`` on, structurally equal subtrees are computed once. Benchmarks
    turn it off so that every scan in a plan costs what a database would pay.
    """

    def __init__(self, instance, share: bool = True):
        self.instance = instance
        self.share = share
        self._memo: dict = {}

    def __call__(self, expr, ctes: Mapping[str, Relation] | None = None) -> Relation:
        return self.eval(expr, dict(ctes or {}))

    def eval(self, expr, ctes: dict[str, Relation]) -> Relation:
        key = (expr, tuple(sorted(ctes))) if ctes else expr
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        result = self._eval(expr, ctes)
        if self.share:
            self._memo[key] = result
        return result

    def _eval(self, expr, ctes) -> Relation:
        if isinstance(expr, BaseRelation):
            rel = self.instance.relation(expr.name)
            if rel.attrs != expr.attrs:
                if set(rel.attrs) != set(expr.attrs):
                    raise SchemaError(f"relation {expr.name} has attributes {rel.attrs}, not {expr.attrs}")
                rel = rel.reorder(expr.attrs)
            return rel
        if isinstance(expr, Empty):
            return Relation(expr.attrs, frozenset())
        if isinstance(expr, CteRef):
            try:
                rel = ctes[expr.name]
            except KeyError:
                raise PlanError(f"unbound CTE name {expr.name!r}") from None
            return rel if rel.attrs == expr.attrs else rel.reorder(expr.attrs)
        if isinstance(expr, WithCte):
            scope = dict(ctes)
            for name, e in expr.bindings:
                scope[name] = self.eval(e, scope)
            return self.eval(expr.body, scope)
        if isinstance(expr, Select):
            if isinstance(expr.child, NaturalJoin) and len(expr.child.children) > 1:
                child = self._filtered_join(expr.cond, expr.child, ctes)
            else:
                child = self.eval(expr.child, ctes)
            pred = compile_filter(expr.cond, child.attrs)
            return Relation(child.attrs, frozenset(r for r in child.rows if pred(r) is True))
        if isinstance(expr, Project):
            child = self.eval(expr.child, ctes)
            if expr.attrs == child.attrs:
                return child
            try:
                idx = [child.attrs.index(a) for a in expr.attrs]
            except ValueError:
                raise SchemaError(f"projection on unknown attributes {expr.attrs} of {child.attrs}") from None
            return Relation(expr.attrs, frozenset(tuple(r[i] for i in idx) for r in child.rows))
        if isinstance(expr, Rename):
            child = self.eval(expr.child, ctes)
            mapping = {old: new for new, old in expr.pairs}
            unknown = set(mapping) - set(child.attrs)
            if unknown:
                raise SchemaError(f"rename of unknown attributes {sorted(unknown)}")
            return Relation(tuple(mapping.get(a, a) for a in child.attrs), child.rows)
        if isinstance(expr, NaturalJoin):
            if not expr.children:
                return Relation((), frozenset({()}))
            rels = [self.eval(c, ctes) for c in expr.children]
            acc = rels[0]
            for r in rels[1:]:
                acc = join(acc, r)
            return acc
        if isinstance(expr, EquiJoin):
            left = self.eval(expr.left, ctes)
            right = self.eval(expr.right, ctes)
            for l, r in expr.pairs:
                if l not in left.attrs or r not in right.attrs:
                    raise SchemaError(f"join condition {l} = {r} references unknown attributes")
            return join(left, right, expr.pairs)
        if isinstance(expr, Union):
            rels = [self.eval(c, ctes) for c in expr.children]
            attrs = rels[0].attrs
            rows = set()
            for r in rels:
                rows |= r.reorder(attrs).rows
            return Relation(attrs, frozenset(rows))
        if isinstance(expr, Difference):
            left = self.eval(expr.left, ctes)
            right = self.eval(expr.right, ctes).reorder(left.attrs)
            return Relation(left.attrs, left.rows - right.rows)
        if isinstance(expr, Padding):
            child = self.eval(expr.child, ctes)
            pad = (None,) * len(expr.attrs)
            return Relation(child.attrs + expr.attrs, frozenset(r + pad for r in child.rows))
        if isinstance(expr, UriConstruct):
            child = self.eval(expr.child, ctes)
            builders = []
            for _, tpl in expr.bindings:
                try:
                    idx = [child.attrs.index(a) for a in tpl.attrs]
                except ValueError:
                    raise SchemaError(f"template {tpl} references unknown attributes") from None
                builders.append((tpl, idx))
            rows = frozenset(r + tuple(t.build([r[i] for i in idx]) for t, idx in builders)
                             for r in child.rows)
            return Relation(child.attrs + tuple(v for v, _ in expr.bindings), rows)
        raise PlanError(f"not a relational expression: {expr!r}")

    def _filtered_join(self, cond, expr: NaturalJoin, ctes) -> Relation:
        """The join under a selection, using ``a = b`` conjuncts as extra hash keys.

        Python equality is implied by ``values_equal``, so these joins keep every
        row the condition accepts; the caller still applies the whole condition.
        """
        rels = [self.eval(c, ctes) for c in expr.children]
        items = cond.items if isinstance(cond, And) else (cond,)
        eqs = [(f.left.name, f.right.name) for f in items
               if isinstance(f, Compare) and f.op == "=" and isinstance(f.left, Attr) and isinstance(f.right, Attr)]
        acc, rest = rels[0], rels[1:]
        while rest:
            pick, pairs = 0, ()
            for i, r in enumerate(rest):
                found = tuple((a, b) if a in acc.attrs and b in r.attrs else (b, a) for a, b in eqs
                              if (a in acc.attrs and b in r.attrs) or (b in acc.attrs and a in r.attrs))
                found = tuple(pr for pr in found if pr[0] != pr[1])
                if found or set(acc.attrs) & set(r.attrs):
                    pick, pairs = i, found
                    break
            acc = join(acc, rest.pop(pick), pairs)
        return acc.reorder(output_attrs(expr))


def join(left: Relation, right: Relation, pairs: tuple[tuple[str, str], ...] = ()) -> Relation:
    """Hash join on shared attributes plus ``pairs``; null never joins."""
    shared = [a for a in left.attrs if a in right.attrs]
    lkeys = [left.attrs.index(a) for a in shared] + [left.attrs.index(l) for l, _ in pairs]
    rkeys = [right.attrs.index(a) for a in shared] + [right.attrs.index(r) for _, r in pairs]
    extra = [i for i, a in enumerate(right.attrs) if a not in left.attrs]
    out_attrs = left.attrs + tuple(right.attrs[i] for i in extra)
    if not lkeys:
        return Relation(out_attrs, frozenset(l + tuple(r[i] for i in extra)
                                             for l in left.rows for r in right.rows))
    index: dict[tuple, list[tuple]] = {}
    for r in right.rows:
        k = tuple(r[i] for i in rkeys)
        if None in k:
            continue
        index.setdefault(k, []).append(r)
    out = set()
    for l in left.rows:
        k = tuple(l[i] for i in lkeys)
        if None in k:
            continue
        for r in index.get(k, ()):
            out.add(l + tuple(r[i] for i in extra))
    return Relation(out_attrs, frozenset(out))


def evaluate(expr, inst) -> Relation:
    """Evaluate ``expr`` over instance ``inst`` under set semantics."""
    return Evaluator(inst)(expr)
