"""Parser for the SELECT-FROM-WHERE subset used in mapping bodies.

Supported::

    SELECT [DISTINCT] * | item, ...      item := [alias.]col [AS name]
    FROM table [[AS] alias] ( , table [alias] | [INNER] JOIN table [alias] ON cond )*
    [WHERE cond]

Conditions combine ``=, <>, !=, <, >, <=, >=`` and ``IS [NOT] NULL`` with
AND / OR / NOT and parentheses. Operands are columns, quoted strings and
integers.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass, field

from ..errors import ParseError
from ..relalg.expr import (And, Attr, BaseRelation, Compare, Const, IsNull, NaturalJoin, Not, Or,
                           Project, Rename, Select, format_filter)
from ..relalg.schema import Schema

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<str>'(?:[^']|'')*')
  | (?P<num>-?\d+)
  | (?P<op><>|!=|<=|>=|=|<|>)
  | (?P<punct>[(),.*])
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)

_KEYWORDS = {"SELECT", "DISTINCT", "FROM", "WHERE", "AND", "OR", "NOT", "IS", "NULL", "AS",
             "JOIN", "INNER", "ON"}


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str, source: str | None) -> list[_Tok]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} in SQL", 1, pos + 1, source)
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            if kind == "name" and tok.upper() in _KEYWORDS:
                out.append(_Tok("kw", tok.upper(), pos))
            else:
                out.append(_Tok(kind, tok, pos))
        pos = m.end()
    out.append(_Tok("eof", "", len(text)))
    return out


@dataclass
class SqlQuery:
    """Parsed body before it is turned into relational algebra."""

    tables: list[tuple[str, str]] = field(default_factory=list)  # (relation, alias)
    select: list[tuple[str, str]] | None = None  # (output name, internal column); None = *
    conds: list = field(default_factory=list)  # filters over internal columns alias.attr


class _Parser:
    def __init__(self, text: str, schema: Schema, source: str | None, offset: tuple[int, int]):
        self.text = text
        self.schema = schema
        self.source = source
        self.line, self.col0 = offset
        self.toks = _tokenize(text, source)
        self.i = 0
        self.q = SqlQuery()
        self._pending_select: list[tuple[str | None, str | None, str, int]] = []

    # -- helpers --------------------------------------------------------------

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.toks[self.i]
        raise ParseError(msg, self.line, self.col0 + tok.pos + 1, self.source)

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def accept(self, kind: str, text: str | None = None) -> _Tok | None:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            self.i += 1
            return tok
        return None

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        tok = self.accept(kind, text)
        if tok is None:
            want = text or kind
            self.error(f"expected {want}, found {self.peek().text or 'end of input'!r}")
        return tok

    # -- grammar ----------------------------------------------------------------

    def parse(self) -> SqlQuery:
        self.expect("kw", "SELECT")
        self.accept("kw", "DISTINCT")
        if self.accept("punct", "*"):
            self.q.select = None
        else:
            self.q.select = []
            self._select_item()
            while self.accept("punct", ","):
                self._select_item()
        self.expect("kw", "FROM")
        self._table()
        while True:
            if self.accept("punct", ","):
                self._table()
            elif self.peek().text in ("JOIN", "INNER"):
                self.accept("kw", "INNER")
                self.expect("kw", "JOIN")
                self._table()
                self.expect("kw", "ON")
                self.q.conds.append(self._cond())
            else:
                break
        if self.accept("kw", "WHERE"):
            self.q.conds.append(self._cond())
        if self.peek().kind != "eof":
            self.error(f"unsupported SQL construct near {self.peek().text!r}")
        self._resolve_select()
        return self.q

    def _select_item(self):
        tok = self.peek()
        qual, col = self._colname()
        name = None
        if self.accept("kw", "AS"):
            name = self.expect("name").text
        self._pending_select.append((name, qual, col, tok.pos))

    def _colname(self) -> tuple[str | None, str]:
        first = self.expect("name").text
        if self.accept("punct", "."):
            return first, self.expect("name").text
        return None, first

    def _table(self):
        tok = self.expect("name")
        rel = tok.text
        if rel not in self.schema.relations:
            self.error(f"unknown relation {rel!r}", tok)
        alias = rel
        if self.accept("kw", "AS"):
            alias = self.expect("name").text
        elif self.peek().kind == "name":
            alias = self.take().text
        if any(a == alias for _, a in self.q.tables):
            self.error(f"duplicate table alias {alias!r}", tok)
        self.q.tables.append((rel, alias))

    def _column(self, qual: str | None, col: str, pos: int) -> str:
        """Resolve a column reference to its internal ``alias.attr`` name."""
        tok = _Tok("name", col, pos)
        if qual is not None:
            for rel, alias in self.q.tables:
                if alias == qual:
                    if col not in self.schema.relations[rel]:
                        self.error(f"unknown attribute {qual}.{col}", tok)
                    return f"{alias}.{col}"
            self.error(f"unknown table alias {qual!r}", tok)
        hits = [alias for rel, alias in self.q.tables if col in self.schema.relations[rel]]
        if not hits:
            self.error(f"unknown attribute {col!r}", tok)
        if len(hits) > 1:
            self.error(f"ambiguous attribute {col!r}", tok)
        return f"{hits[0]}.{col}"

    def _resolve_select(self):
        if self.q.select is None:
            names: dict[str, str] = {}
            for rel, alias in self.q.tables:
                for a in self.schema.relations[rel]:
                    if a in names:
                        raise ParseError(f"SELECT * yields duplicate column {a!r}; list columns explicitly",
                                         self.line, self.col0 + 1, self.source)
                    names[a] = f"{alias}.{a}"
            self.q.select = list(names.items())
        else:
            seen = set()
            for name, qual, col, pos in self._pending_select:
                internal = self._column(qual, col, pos)
                out = name or col
                if out in seen:
                    raise ParseError(f"duplicate output column {out!r}", self.line, self.col0 + pos + 1,
                                     self.source)
                seen.add(out)
                self.q.select.append((out, internal))
        self.q.conds = [self._resolve(c) for c in self.q.conds]

    # Conditions are parsed with raw column references and resolved once all
    # tables are known (ON clauses may mention later aliases in WHERE).

    def _cond(self):
        items = [self._conj()]
        while self.accept("kw", "OR"):
            items.append(self._conj())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def _conj(self):
        items = [self._neg()]
        while self.accept("kw", "AND"):
            items.append(self._neg())
        return items[0] if len(items) == 1 else And(tuple(items))

    def _neg(self):
        if self.accept("kw", "NOT"):
            return Not(self._neg())
        if self.accept("punct", "("):
            inner = self._cond()
            self.expect("punct", ")")
            return inner
        return self._pred()

    def _operand(self):
        tok = self.peek()
        if tok.kind == "str":
            self.take()
            return Const(tok.text[1:-1].replace("''", "'"))
        if tok.kind == "num":
            self.take()
            return Const(int(tok.text))
        if tok.kind == "name":
            qual, col = self._colname()
            return Attr(f"{qual or ''}\x00{col}\x00{tok.pos}")
        self.error(f"expected column or constant, found {tok.text or 'end of input'!r}")

    def _pred(self):
        left = self._operand()
        if self.accept("kw", "IS"):
            negated = bool(self.accept("kw", "NOT"))
            self.expect("kw", "NULL")
            if not isinstance(left, Attr):
                self.error("IS NULL needs a column")
            f = IsNull((left.name,))
            return Not(f) if negated else f
        tok = self.expect("op")
        right = self._operand()
        op = {"<>": "!="}.get(tok.text, tok.text)
        return Compare(op, left, right)

    def _resolve(self, f):
        if isinstance(f, IsNull):
            return IsNull(tuple(self._ref(a) for a in f.attrs))
        if isinstance(f, Compare):
            left, right = self._side(f.left), self._side(f.right)
            left, right = self._coerce(left, right), self._coerce(right, left)
            return Compare(f.op, left, right)
        if isinstance(f, And):
            return And(tuple(self._resolve(i) for i in f.items))
        if isinstance(f, Or):
            return Or(tuple(self._resolve(i) for i in f.items))
        if isinstance(f, Not):
            return Not(self._resolve(f.item))
        raise AssertionError(f)

    def _ref(self, raw: str) -> str:
        qual, col, pos = raw.split("\x00")
        return self._column(qual or None, col, int(pos))

    def _side(self, x):
        return Attr(self._ref(x.name)) if isinstance(x, Attr) else x

    def _coerce(self, x, other):
        """String constants compared with date columns become dates."""
        if isinstance(x, Const) and isinstance(x.value, str) and isinstance(other, Attr):
            alias, _, attr = other.name.partition(".")
            rel = next(r for r, a in self.q.tables if a == alias)
            if self.schema.type_of(rel, attr) == "date":
                try:
                    return Const(datetime.date.fromisoformat(x.value))
                except ValueError:
                    self.error(f"invalid date literal {x.value!r}")
        return x


def parse_sql(text: str, schema: Schema, source: str | None = None,
              offset: tuple[int, int] = (1, 0)) -> SqlQuery:
    return _Parser(text, schema, source, offset).parse()


def canonical_condition(items):
    """Flatten, dedupe and sort a conjunction so equivalent bodies compare equal."""
    flat = []
    stack = list(items)
    while stack:
        it = stack.pop(0)
        if isinstance(it, And):
            stack[:0] = list(it.items)
        else:
            flat.append(it)
    uniq = {format_filter(f): f for f in flat}
    ordered = [uniq[k] for k in sorted(uniq)]
    if not ordered:
        return None
    return ordered[0] if len(ordered) == 1 else And(tuple(ordered))


def build_body(q: SqlQuery, schema: Schema, not_null_outputs=()) -> object:
    """Relational form of a parsed body with σ_notNull on the given outputs."""
    scans = []
    for rel, alias in q.tables:
        attrs = schema.relations[rel]
        scans.append(Rename(tuple((f"{alias}.{a}", a) for a in attrs), BaseRelation(rel, attrs)))
    expr = scans[0] if len(scans) == 1 else NaturalJoin(tuple(scans))
    internal_of = dict(q.select)
    conds = list(q.conds)
    for out in not_null_outputs:
        conds.append(Not(IsNull((internal_of[out],))))
    cond = canonical_condition(conds)
    if cond is not None:
        expr = Select(cond, expr)
    internals = tuple(i for _, i in q.select)
    expr = Project(internals, expr)
    pairs = tuple((o, i) for o, i in q.select if o != i)
    return Rename(pairs, expr) if pairs else expr
