"""Deterministic SQL text for relational expressions.

Chains of selections, projections, renamings and term constructors over
joins are folded into one ``SELECT DISTINCT ... FROM ... JOIN ... ON ...
WHERE ...`` block; unions and differences become derived tables. Term
construction concatenates template pieces with ``||``.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass, field

from ..errors import PlanError
from ..relalg.expr import (And, Attr, BaseRelation, Compare, Const, CteRef, Difference, Empty, EquiJoin,
                           IsNull, NaturalJoin, Not, Or, Padding, Project, Rename, Select, Union,
                           UriConstruct, WithCte, output_attrs)
from ..template import Template
from ..terms import IRI, TypedLiteral

_PLAIN = re.compile(r"[a-z_][a-z0-9_]*")


def ident(name: str) -> str:
    if _PLAIN.fullmatch(name):
        return name
    return '"' + name.replace('"', '""') + '"'


def sql_value(v) -> str:
    if v is None:
        return "NULL"
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, datetime.date):
        return f"DATE '{v.isoformat()}'"
    if isinstance(v, TypedLiteral):
        v = v.lexical
    return "'" + str(v).replace("'", "''") + "'"


def template_sql(tpl: Template, cols: dict[str, str]) -> str:
    if tpl.kind == "const":
        return sql_value(tpl.value if not isinstance(tpl.value, IRI) else str(tpl.value))
    if tpl.kind == "column":
        return cols[tpl.attrs[0]]
    pieces = []
    for i, seg in enumerate(tpl.segments):
        if seg:
            pieces.append(sql_value(seg))
        if i < len(tpl.attrs):
            pieces.append(f"CAST({cols[tpl.attrs[i]]} AS VARCHAR)")
    return " || ".join(pieces) if pieces else "''"


def filter_sql(f, cols: dict[str, str]) -> str:
    if isinstance(f, Compare):
        def side(x):
            return cols[x.name] if isinstance(x, Attr) else sql_value(x.value)
        op = "<>" if f.op == "!=" else f.op
        return f"{side(f.left)} {op} {side(f.right)}"
    if isinstance(f, IsNull):
        return " AND ".join(f"{cols[a]} IS NULL" for a in f.attrs) or "1 = 1"
    if isinstance(f, Not):
        if isinstance(f.item, IsNull) and len(f.item.attrs) == 1:
            return f"{cols[f.item.attrs[0]]} IS NOT NULL"
        return f"NOT ({filter_sql(f.item, cols)})"
    if isinstance(f, And):
        if not f.items:
            return "1 = 1"
        parts = [filter_sql(i, cols) for i in f.items]
        return parts[0] if len(parts) == 1 else "(" + " AND ".join(parts) + ")"
    if isinstance(f, Or):
        if not f.items:
            return "1 = 0"
        return "(" + " OR ".join(filter_sql(i, cols) for i in f.items) + ")"
    raise PlanError(f"not a filter: {f!r}")


@dataclass
class _Block:
    frm: str
    cols: dict[str, str]
    where: list[str] = field(default_factory=list)
    joined: bool = False


class _Emitter:
    def __init__(self):
        self.counter = 0

    def alias(self) -> str:
        self.counter += 1
        return f"q{self.counter}"

    def statement(self, expr, attrs: tuple[str, ...] | None = None) -> str:
        if isinstance(expr, WithCte):
            parts = [f"{ident(n)} AS (\n{_indent(self.statement(e))}\n)" for n, e in expr.bindings]
            return "WITH " + ",\n".join(parts) + "\n" + self.statement(expr.body, attrs)
        attrs = output_attrs(expr) if attrs is None else attrs
        b = self.block(expr)
        items = ", ".join(f"{b.cols[a]} AS {ident(a)}" for a in attrs) or "1 AS one"
        text = f"SELECT DISTINCT {items}\nFROM {b.frm}"
        if b.where:
            text += "\nWHERE " + "\n  AND ".join(b.where)
        return text

    def derived(self, sql: str, attrs) -> _Block:
        a = self.alias()
        return _Block(f"(\n{_indent(sql)}\n) {a}", {x: f"{a}.{ident(x)}" for x in attrs})

    def block(self, e) -> _Block:
        if isinstance(e, (BaseRelation, CteRef)):
            a = self.alias()
            return _Block(f"{ident(e.name)} {a}", {x: f"{a}.{ident(x)}" for x in e.attrs})
        if isinstance(e, Empty):
            items = ", ".join(f"NULL AS {ident(x)}" for x in e.attrs) or "1 AS one"
            return self.derived(f"SELECT {items} WHERE 1 = 0", e.attrs)
        if isinstance(e, Select):
            b = self.block(e.child)
            items = e.cond.items if isinstance(e.cond, And) and e.cond.items else (e.cond,)
            for item in items:
                text = filter_sql(item, b.cols)
                if text not in b.where:
                    b.where.append(text)
            return b
        if isinstance(e, Project):
            b = self.block(e.child)
            b.cols = {a: b.cols[a] for a in e.attrs}
            return b
        if isinstance(e, Rename):
            b = self.block(e.child)
            mapping = {old: new for new, old in e.pairs}
            b.cols = {mapping.get(a, a): c for a, c in b.cols.items()}
            return b
        if isinstance(e, Padding):
            b = self.block(e.child)
            b.cols.update({a: "NULL" for a in e.attrs})
            return b
        if isinstance(e, UriConstruct):
            b = self.block(e.child)
            for v, tpl in e.bindings:
                b.cols[v] = template_sql(tpl, b.cols)
            return b
        if isinstance(e, EquiJoin):
            left, right = self.block(e.left), self.block(e.right)
            shared = [a for a in left.cols if a in right.cols]
            on = [(left.cols[a], right.cols[a]) for a in shared]
            on += [(left.cols[l], right.cols[r]) for l, r in e.pairs]
            return self.join(left, right, on)
        if isinstance(e, NaturalJoin):
            if not e.children:
                return self.derived("SELECT 1 AS one", ())
            acc = self.block(e.children[0])
            for c in e.children[1:]:
                right = self.block(c)
                on = [(acc.cols[a], right.cols[a]) for a in acc.cols if a in right.cols]
                acc = self.join(acc, right, on)
            return acc
        if isinstance(e, Union):
            attrs = output_attrs(e)
            sql = "\nUNION\n".join(self.statement(c, attrs) for c in e.children)
            return self.derived(sql, attrs)
        if isinstance(e, Difference):
            attrs = output_attrs(e)
            sql = self.statement(e.left, attrs) + "\nEXCEPT\n" + self.statement(e.right, attrs)
            return self.derived(sql, attrs)
        if isinstance(e, WithCte):
            return self.derived(self.statement(e), output_attrs(e))
        raise PlanError(f"not a relational expression: {e!r}")

    def join(self, left: _Block, right: _Block, on: list[tuple[str, str]]) -> _Block:
        rfrm = f"({right.frm})" if right.joined else right.frm
        if on:
            cond = " AND ".join(f"{a} = {b}" for a, b in on)
            frm = f"{left.frm}\nJOIN {rfrm} ON {cond}"
        else:
            frm = f"{left.frm}\nCROSS JOIN {rfrm}"
        cols = dict(left.cols)
        cols.update({a: c for a, c in right.cols.items() if a not in cols})
        return _Block(frm, cols, left.where + [w for w in right.where if w not in left.where], True)


def _indent(text: str) -> str:
    return "\n".join("  " + line for line in text.splitlines())


def emit_sql(expr, options=None) -> str:
    """SQL text for ``expr``; identical input always yields identical text."""
    return _Emitter().statement(expr) + ";\n"
