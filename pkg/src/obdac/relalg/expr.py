"""Relational-algebra expression trees and filter formulas.

Nodes are immutable and hashable; hashes are cached so large trees can be
deduplicated and memoized cheaply.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any, Iterator

from ..errors import PlanError
from ..template import Template


class _Node:
    """Mixin giving frozen dataclasses a cached structural hash."""

    __slots__ = ()

    def _key(self) -> tuple:
        return (type(self).__name__,) + tuple(getattr(self, f.name) for f in fields(self))

    def __hash__(self) -> int:
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = hash(self._key())
            object.__setattr__(self, "_hash", h)
            return h

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __ne__(self, other: object) -> bool:
        return not self.__eq__(other)


def _node(cls):
    cls = dataclass(frozen=True, eq=False)(cls)
    cls.__hash__ = _Node.__hash__
    cls.__eq__ = _Node.__eq__
    return cls


# ---------------------------------------------------------------------------
# Filter formulas (three-valued: True / False / None for ε)

@_node
class Attr(_Node):
    name: str

    def __str__(self) -> str:
        return self.name


@_node
class Const(_Node):
    value: Any

    def __str__(self) -> str:
        from ..terms import format_term
        return format_term(self.value)


COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")


@_node
class IsNull(_Node):
    """True iff every listed attribute is null."""

    attrs: tuple[str, ...]


@_node
class Compare(_Node):
    op: str
    left: Attr | Const
    right: Attr | Const


@_node
class And(_Node):
    items: tuple


@_node
class Or(_Node):
    items: tuple


@_node
class Not(_Node):
    item: Any


TRUE = And(())


def conj(*items) -> Any:
    """Flattened conjunction; ``conj()`` is the always-true filter."""
    out = []
    for it in items:
        if isinstance(it, And):
            out.extend(it.items)
        else:
            out.append(it)
    return out[0] if len(out) == 1 else And(tuple(out))


def not_null(*attrs: str):
    return conj(*(Not(IsNull((a,))) for a in attrs))


def eq(left: str, right: Any, const: bool = False) -> Compare:
    return Compare("=", Attr(left), Const(right) if const else Attr(right))


def filter_attrs(f) -> set[str]:
    if isinstance(f, IsNull):
        return set(f.attrs)
    if isinstance(f, Compare):
        return {x.name for x in (f.left, f.right) if isinstance(x, Attr)}
    if isinstance(f, (And, Or)):
        out: set[str] = set()
        for it in f.items:
            out |= filter_attrs(it)
        return out
    if isinstance(f, Not):
        return filter_attrs(f.item)
    raise PlanError(f"not a filter: {f!r}")


def rename_filter(f, mapping: dict[str, str]):
    if isinstance(f, IsNull):
        return IsNull(tuple(mapping.get(a, a) for a in f.attrs))
    if isinstance(f, Compare):
        def side(x):
            return Attr(mapping.get(x.name, x.name)) if isinstance(x, Attr) else x
        return Compare(f.op, side(f.left), side(f.right))
    if isinstance(f, And):
        return And(tuple(rename_filter(i, mapping) for i in f.items))
    if isinstance(f, Or):
        return Or(tuple(rename_filter(i, mapping) for i in f.items))
    if isinstance(f, Not):
        return Not(rename_filter(f.item, mapping))
    raise PlanError(f"not a filter: {f!r}")


def format_filter(f) -> str:
    if isinstance(f, IsNull):
        return f"isNull({', '.join(f.attrs)})"
    if isinstance(f, Compare):
        return f"{f.left} {f.op} {f.right}"
    if isinstance(f, And):
        return " AND ".join(_paren(i) for i in f.items) if f.items else "TRUE"
    if isinstance(f, Or):
        return " OR ".join(_paren(i) for i in f.items) if f.items else "FALSE"
    if isinstance(f, Not):
        if isinstance(f.item, IsNull) and len(f.item.attrs) == 1:
            return f"notNull({f.item.attrs[0]})"
        return f"NOT {_paren(f.item)}"
    raise PlanError(f"not a filter: {f!r}")


def _paren(f) -> str:
    s = format_filter(f)
    return f"({s})" if isinstance(f, (And, Or)) and len(f.items) > 1 else s


# ---------------------------------------------------------------------------
# Relational expressions

@_node
class BaseRelation(_Node):
    name: str
    attrs: tuple[str, ...]


@_node
class Empty(_Node):
    """The empty relation over ``attrs`` (e.g. an unmapped predicate)."""

    attrs: tuple[str, ...]


@_node
class Select(_Node):
    cond: Any
    child: Any


@_node
class Project(_Node):
    attrs: tuple[str, ...]
    child: Any


@_node
class Rename(_Node):
    """Relabels attributes; ``pairs`` holds (new, old) names."""

    pairs: tuple[tuple[str, str], ...]
    child: Any


@_node
class NaturalJoin(_Node):
    children: tuple


@_node
class EquiJoin(_Node):
    """Natural join of two inputs plus equalities ``left.a = right.b``."""

    left: Any
    right: Any
    pairs: tuple[tuple[str, str], ...]


@_node
class Union(_Node):
    children: tuple


@_node
class Difference(_Node):
    left: Any
    right: Any


@_node
class Padding(_Node):
    """Adds the given attributes, all null."""

    attrs: tuple[str, ...]
    child: Any


@_node
class UriConstruct(_Node):
    """Adds one output attribute per binding ``var <- template(attrs)``."""

    bindings: tuple[tuple[str, Template], ...]
    child: Any


@_node
class CteRef(_Node):
    name: str
    attrs: tuple[str, ...]


@_node
class WithCte(_Node):
    bindings: tuple[tuple[str, Any], ...]
    body: Any


RELEXPR_TYPES = (BaseRelation, Empty, Select, Project, Rename, NaturalJoin, EquiJoin, Union,
                 Difference, Padding, UriConstruct, CteRef, WithCte)


def children(expr) -> tuple:
    if isinstance(expr, (Select, Project, Rename, Padding, UriConstruct)):
        return (expr.child,)
    if isinstance(expr, (NaturalJoin, Union)):
        return expr.children
    if isinstance(expr, (EquiJoin, Difference)):
        return (expr.left, expr.right)
    if isinstance(expr, WithCte):
        return tuple(e for _, e in expr.bindings) + (expr.body,)
    return ()


def walk(expr, opaque=frozenset()) -> Iterator:
    """Pre-order traversal; nodes in ``opaque`` are yielded but not entered."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        if node not in opaque:
            stack.extend(reversed(children(node)))


def output_attrs(expr, ctes: dict[str, tuple[str, ...]] | None = None) -> tuple[str, ...]:
    """Attribute list of an expression, checking well-formedness."""
    if isinstance(expr, (BaseRelation, Empty, CteRef)):
        return expr.attrs
    if isinstance(expr, Select):
        attrs = output_attrs(expr.child, ctes)
        missing = filter_attrs(expr.cond) - set(attrs)
        if missing:
            raise PlanError(f"filter references unknown attributes {sorted(missing)}")
        return attrs
    if isinstance(expr, Project):
        attrs = output_attrs(expr.child, ctes)
        missing = set(expr.attrs) - set(attrs)
        if missing:
            raise PlanError(f"projection references unknown attributes {sorted(missing)}")
        return expr.attrs
    if isinstance(expr, Rename):
        attrs = output_attrs(expr.child, ctes)
        mapping = {old: new for new, old in expr.pairs}
        missing = set(mapping) - set(attrs)
        if missing:
            raise PlanError(f"rename of unknown attributes {sorted(missing)}")
        out = tuple(mapping.get(a, a) for a in attrs)
        if len(set(out)) != len(out):
            raise PlanError(f"rename produces duplicate attributes {out}")
        return out
    if isinstance(expr, NaturalJoin):
        out: list[str] = []
        for c in expr.children:
            for a in output_attrs(c, ctes):
                if a not in out:
                    out.append(a)
        return tuple(out)
    if isinstance(expr, EquiJoin):
        left = output_attrs(expr.left, ctes)
        right = output_attrs(expr.right, ctes)
        for l, r in expr.pairs:
            if l not in left or r not in right:
                raise PlanError(f"join condition {l} = {r} references unknown attributes")
        return left + tuple(a for a in right if a not in left)
    if isinstance(expr, Union):
        if not expr.children:
            raise PlanError("union without branches")
        first = output_attrs(expr.children[0], ctes)
        for c in expr.children[1:]:
            if set(output_attrs(c, ctes)) != set(first):
                raise PlanError("union branches have different attributes")
        return first
    if isinstance(expr, Difference):
        left = output_attrs(expr.left, ctes)
        if set(output_attrs(expr.right, ctes)) != set(left):
            raise PlanError("difference operands have different attributes")
        return left
    if isinstance(expr, Padding):
        attrs = output_attrs(expr.child, ctes)
        if set(expr.attrs) & set(attrs):
            raise PlanError("padding attributes must be fresh")
        return attrs + expr.attrs
    if isinstance(expr, UriConstruct):
        attrs = output_attrs(expr.child, ctes)
        new = [v for v, _ in expr.bindings]
        if set(new) & set(attrs) or len(set(new)) != len(new):
            raise PlanError(f"constructed attributes {new} are not fresh")
        for _, tpl in expr.bindings:
            missing = set(tpl.attrs) - set(attrs)
            if missing:
                raise PlanError(f"template {tpl} references unknown attributes {sorted(missing)}")
        return attrs + tuple(new)
    if isinstance(expr, WithCte):
        scope = dict(ctes or {})
        for name, e in expr.bindings:
            scope[name] = output_attrs(e, scope)
        return output_attrs(expr.body, scope)
    raise PlanError(f"not a relational expression: {expr!r}")


# ---------------------------------------------------------------------------
# Size metrics used by explain traces and acceptance checks

def count_joins(expr, opaque=frozenset()) -> int:
    """Binary joins; subtrees in ``opaque`` (e.g. mapping bodies) count as plain leaves."""
    n = 0
    for node in walk(expr, opaque):
        if node in opaque:
            continue
        if isinstance(node, NaturalJoin):
            n += max(len(node.children) - 1, 0)
        elif isinstance(node, EquiJoin):
            n += 1
    return n


def count_unions(expr, opaque=frozenset()) -> int:
    """Number of binary union operators (a k-ary union counts k-1)."""
    return sum(len(n.children) - 1 for n in walk(expr, opaque) if isinstance(n, Union) and n not in opaque)


def count_scans(expr, name: str | None = None) -> int:
    return sum(1 for n in walk(expr) if isinstance(n, BaseRelation) and (name is None or n.name == name))


def union_branches(expr) -> int:
    """Branch count of the top-level union (1 for a non-union)."""
    while isinstance(expr, (Project, Select, Rename, UriConstruct, Padding)):
        expr = expr.child
    if isinstance(expr, WithCte):
        return union_branches(expr.body)
    return len(expr.children) if isinstance(expr, Union) else 1


def format_expr(expr, indent: int = 0) -> str:
    """Multi-line pretty print."""
    pad = "  " * indent
    if isinstance(expr, BaseRelation):
        return f"{pad}{expr.name}"
    if isinstance(expr, Empty):
        return f"{pad}EMPTY({', '.join(expr.attrs)})"
    if isinstance(expr, CteRef):
        return f"{pad}{expr.name}"
    if isinstance(expr, Select):
        head = f"σ[{format_filter(expr.cond)}]"
    elif isinstance(expr, Project):
        head = f"π[{', '.join(expr.attrs)}]"
    elif isinstance(expr, Rename):
        head = f"ρ[{', '.join(f'{n}/{o}' for n, o in expr.pairs)}]"
    elif isinstance(expr, NaturalJoin):
        head = "⋈"
    elif isinstance(expr, EquiJoin):
        head = f"⋈[{', '.join(f'{l}={r}' for l, r in expr.pairs)}]"
    elif isinstance(expr, Union):
        head = "∪"
    elif isinstance(expr, Difference):
        head = "∖"
    elif isinstance(expr, Padding):
        head = f"μ[{', '.join(expr.attrs)}]"
    elif isinstance(expr, UriConstruct):
        head = f"π[{', '.join(f'{v}/{t}' for v, t in expr.bindings)}]"
    elif isinstance(expr, WithCte):
        lines = [f"{pad}WITH"]
        for name, e in expr.bindings:
            lines.append(f"{pad}  {name} AS")
            lines.append(format_expr(e, indent + 2))
        lines.append(format_expr(expr.body, indent + 1))
        return "\n".join(lines)
    else:
        raise PlanError(f"not a relational expression: {expr!r}")
    return "\n".join([pad + head] + [format_expr(c, indent + 1) for c in children(expr)])


def infer_types(expr, schema, ctes: dict[str, dict[str, str]] | None = None) -> dict[str, str]:
    """Scalar type per output attribute: ``int``/``text``/``date``, ``term`` or ``null``."""
    if isinstance(expr, BaseRelation):
        return {a: schema.type_of(expr.name, a) for a in expr.attrs}
    if isinstance(expr, Empty):
        return {a: "null" for a in expr.attrs}
    if isinstance(expr, CteRef):
        return dict((ctes or {}).get(expr.name, {a: "term" for a in expr.attrs}))
    if isinstance(expr, Select):
        return infer_types(expr.child, schema, ctes)
    if isinstance(expr, Project):
        inner = infer_types(expr.child, schema, ctes)
        return {a: inner[a] for a in expr.attrs}
    if isinstance(expr, Rename):
        inner = infer_types(expr.child, schema, ctes)
        mapping = {old: new for new, old in expr.pairs}
        return {mapping.get(a, a): t for a, t in inner.items()}
    if isinstance(expr, (NaturalJoin, Union)):
        out: dict[str, str] = {}
        for c in expr.children:
            for a, t in infer_types(c, schema, ctes).items():
                out[a] = t if out.get(a, "null") == "null" else out[a]
        return out
    if isinstance(expr, (EquiJoin, Difference)):
        out = infer_types(expr.right, schema, ctes)
        out.update(infer_types(expr.left, schema, ctes))
        return out
    if isinstance(expr, Padding):
        out = infer_types(expr.child, schema, ctes)
        out.update({a: "null" for a in expr.attrs})
        return out
    if isinstance(expr, UriConstruct):
        out = infer_types(expr.child, schema, ctes)
        out.update({v: "term" for v, _ in expr.bindings})
        return out
    if isinstance(expr, WithCte):
        scope = dict(ctes or {})
        for name, e in expr.bindings:
            scope[name] = infer_types(e, schema, scope)
        return infer_types(expr.body, schema, scope)
    raise PlanError(f"not a relational expression: {expr!r}")
