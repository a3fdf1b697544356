"""Parser for the supported SELECT subset of SPARQL.

Accepted: ``PREFIX``, ``SELECT [DISTINCT] * | ?v ...``, ``WHERE { ... }`` with
triple blocks (``;`` and ``,`` abbreviations), ``OPTIONAL``, ``UNION``,
nested groups, ``FILTER`` over ``= != < <= > >=``, ``bound``, ``!``, ``&&``,
``||``, and ``BIND(constant AS ?v)``. Everything else is rejected with a
line/column diagnostic.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from pathlib import Path

from ..errors import ParseError
from ..template import literal_value
from ..terms import IRI, RDF_TYPE, canonical_iri
from .ast import (BGP, AndE, Bind, Bound, Cmp, Filter, Join, NotE, Opt, OrE, Query, Triple, Union, Var,
                  conjoin, pattern_vars)

_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<iri><[^<>"{}|^`\\\s]*>)
  | (?P<var>[?$][A-Za-z_]\w*)
  | (?P<bnode>_:[A-Za-z_][\w-]*|\[\s*\])
  | (?P<str>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<num>[+-]?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<pname>(?:[A-Za-z][\w-]*)?:(?:[\w-]+(?:\.[\w-]+)*)?)
  | (?P<op>\^\^|&&|\|\||!=|<=|>=|[=<>!])
  | (?P<punct>[{}().;,/|^*+?@\[\]])
  | (?P<word>[A-Za-z_]\w*)
""", re.VERBOSE)

_UNSUPPORTED = {
    "GROUP": "aggregation (GROUP BY)", "HAVING": "aggregation (HAVING)",
    "COUNT": "aggregates", "SUM": "aggregates", "MIN": "aggregates", "MAX": "aggregates",
    "AVG": "aggregates", "SAMPLE": "aggregates", "GROUP_CONCAT": "aggregates",
    "ORDER": "ORDER BY", "LIMIT": "LIMIT", "OFFSET": "OFFSET", "VALUES": "VALUES",
    "MINUS": "MINUS", "SERVICE": "federation (SERVICE)", "GRAPH": "named graphs",
    "CONSTRUCT": "CONSTRUCT queries", "ASK": "ASK queries", "DESCRIBE": "DESCRIBE queries",
    "FROM": "dataset clauses", "EXISTS": "EXISTS filters", "NOT": "NOT EXISTS filters",
    "BASE": "BASE declarations", "REDUCED": "REDUCED",
}


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "'": "'", "\\": "\\"}


def _unescape(text: str) -> str:
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), text)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


class _Parser:
    def __init__(self, text: str, source: str | None, prefixes: dict[str, str] | None):
        self.text = text
        self.source = source
        self.prefixes = dict(prefixes or {})
        self.toks = self._tokenize()
        self.i = 0
        self.fresh = itertools.count(1)

    # -- lexing ---------------------------------------------------------------

    def _tokenize(self) -> list[_Tok]:
        out, pos = [], 0
        while pos < len(self.text):
            m = _TOKEN.match(self.text, pos)
            if not m:
                self._fail(f"unexpected character {self.text[pos]!r}", pos)
            if m.lastgroup != "ws":
                out.append(_Tok(m.lastgroup, m.group(), pos))
            pos = m.end()
        out.append(_Tok("eof", "", len(self.text)))
        return out

    def _fail(self, msg: str, pos: int):
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        raise ParseError(msg, line, col, self.source)

    def error(self, msg: str, tok: _Tok | None = None):
        self._fail(msg, (tok or self.peek()).pos)

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def is_word(self, word: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == "word" and tok.text.upper() == word

    def accept_word(self, word: str) -> bool:
        if self.is_word(word):
            self.i += 1
            return True
        return False

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok.kind in ("punct", "op") and tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            found = self.peek().text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")

    def check_unsupported(self):
        tok = self.peek()
        if tok.kind == "word" and tok.text.upper() in _UNSUPPORTED:
            self.error(f"unsupported construct: {_UNSUPPORTED[tok.text.upper()]}")

    # -- query ----------------------------------------------------------------

    def parse(self) -> Query:
        while self.is_word("PREFIX"):
            self.take()
            tok = self.take()
            if tok.kind != "pname" or not tok.text.endswith(":"):
                self.error("expected prefix label such as 'ex:'", tok)
            iri = self.take()
            if iri.kind != "iri":
                self.error("expected <namespace IRI>", iri)
            self.prefixes[tok.text[:-1]] = iri.text[1:-1]
        self.check_unsupported()
        if not self.accept_word("SELECT"):
            self.error("expected SELECT")
        self.accept_word("DISTINCT")
        self.check_unsupported()
        projection: list[Var] | None = []
        if self.accept("*"):
            projection = None
        else:
            while self.peek().kind == "var":
                projection.append(Var(self.take().text[1:]))
            if self.peek().text == "(":
                self.error("unsupported construct: projection expressions / aggregates")
            if not projection:
                self.error("expected '*' or answer variables")
        self.check_unsupported()
        self.accept_word("WHERE")
        if self.peek().text != "{":
            self.check_unsupported()
            self.error("expected '{'")
        pattern = self.group()
        self.check_unsupported()
        if self.peek().kind != "eof":
            self.error(f"unexpected {self.peek().text!r} after query body")
        if projection is not None:
            if len(set(projection)) != len(projection):
                self.error("duplicate answer variable")
            projection = tuple(projection)
        return Query(pattern, projection)

    # -- group graph patterns ---------------------------------------------------

    def group(self):
        self.expect("{")
        current = None
        filters = []

        def join(p):
            nonlocal current
            if current is None:
                current = p
            elif isinstance(current, BGP) and isinstance(p, BGP):
                current = BGP(current.triples + tuple(t for t in p.triples if t not in current.triples))
            else:
                current = Join(current, p)

        while True:
            self.check_unsupported()
            tok = self.peek()
            if tok.text == "}" and tok.kind == "punct":
                self.take()
                break
            if tok.kind == "eof":
                self.error("unterminated group: expected '}'")
            if self.is_word("SELECT"):
                self.error("unsupported construct: subqueries")
            if self.accept_word("OPTIONAL"):
                right = self.group()
                cond = None
                if isinstance(right, Filter):
                    right, cond = right.pattern, right.cond
                current = Opt(current if current is not None else BGP(), right, cond)
            elif self.accept_word("FILTER"):
                filters.append(self.filter_constraint())
            elif self.accept_word("BIND"):
                start = self.peek()
                self.expect("(")
                value = self.constant()
                if not self.accept_word("AS"):
                    self.error("expected AS")
                vt = self.take()
                if vt.kind != "var":
                    self.error("expected variable after AS", vt)
                var = Var(vt.text[1:])
                self.expect(")")
                base = current if current is not None else BGP()
                if var in pattern_vars(base):
                    self.error(f"BIND variable {var} is already in scope", start)
                current = Bind(base, var, value)
            elif tok.text == "{":
                p = self.group()
                while self.accept_word("UNION"):
                    p = Union(p, self.group())
                join(p)
            elif tok.text == "." and tok.kind == "punct":
                self.take()
            else:
                join(BGP(tuple(self.triples_block())))
        pattern = current if current is not None else BGP()
        cond = conjoin(filters)
        return Filter(pattern, cond) if cond is not None else pattern

    def triples_block(self) -> list[Triple]:
        out: list[Triple] = []
        subject = self.term("subject")
        while True:
            pred = self.predicate()
            while True:
                obj = self.term("object")
                if self.peek().text in ("/", "|", "*", "+", "?") and self.peek().kind == "punct":
                    self.error("unsupported construct: property paths")
                t = Triple(subject, pred, obj)
                if t not in out:
                    out.append(t)
                if not self.accept(","):
                    break
            if not self.accept(";"):
                break
            if self.peek().text in (".", "}"):
                break
        if not self.accept("."):
            nxt = self.peek()
            if nxt.text not in ("}", "{") and not any(self.is_word(w) for w in ("FILTER", "OPTIONAL", "BIND")):
                self.error(f"expected '.' or '}}', found {self.peek().text or 'end of input'!r}")
        return out

    def predicate(self):
        tok = self.peek()
        if tok.text in ("^", "(", "!"):
            self.error("unsupported construct: property paths")
        if tok.kind == "word" and tok.text == "a":
            self.take()
            pred = RDF_TYPE
        elif tok.kind == "var":
            self.take()
            pred = Var(tok.text[1:])
        elif tok.kind in ("iri", "pname"):
            pred = self.iri(self.take())
        else:
            self.error(f"expected predicate, found {tok.text or 'end of input'!r}")
        nxt = self.peek()
        if nxt.kind == "punct" and nxt.text in ("/", "|", "*", "+", "?"):
            self.error("unsupported construct: property paths", nxt)
        return pred

    def iri(self, tok: _Tok) -> IRI:
        if tok.kind == "iri":
            return IRI(canonical_iri(tok.text, self.prefixes))
        pfx = tok.text.split(":", 1)[0]
        if self.prefixes and pfx not in self.prefixes and pfx not in ("", "rdf", "rdfs", "xsd", "owl"):
            self.error(f"undeclared prefix {pfx + ':'!r}", tok)
        return IRI(canonical_iri(tok.text, self.prefixes))

    def term(self, role: str):
        tok = self.peek()
        if tok.kind == "var":
            self.take()
            return Var(tok.text[1:])
        if tok.kind == "bnode":
            self.take()
            return Var(f"_:b{next(self.fresh)}")
        if tok.kind == "punct" and tok.text == "[":
            self.error("unsupported construct: blank node property lists")
        if tok.kind == "punct" and tok.text == "(":
            self.error("unsupported construct: RDF collections")
        return self.constant(role)

    def constant(self, role: str = "value"):
        tok = self.take()
        if tok.kind in ("iri", "pname"):
            return self.iri(tok)
        if tok.kind == "num":
            if not re.fullmatch(r"[+-]?\d+", tok.text):
                self.error("only integer numerals are supported", tok)
            return int(tok.text)
        if tok.kind == "str":
            lexical = _unescape(tok.text[1:-1])
            if self.accept("^^"):
                dt = self.take()
                if dt.kind not in ("iri", "pname"):
                    self.error("expected datatype IRI", dt)
                return literal_value(lexical, str(self.iri(dt)))
            if self.peek().text == "@":
                self.error("unsupported construct: language tags")
            return lexical
        self.i -= 1
        self.error(f"expected {role}, found {tok.text or 'end of input'!r}", tok)

    # -- filters ------------------------------------------------------------------

    def filter_constraint(self):
        if self.is_word("BOUND"):
            return self.primary()
        self.check_unsupported()
        if self.peek().text != "(":
            self.error("expected '(' after FILTER")
        return self.primary()

    def or_expr(self):
        items = [self.and_expr()]
        while self.accept("||"):
            items.append(self.and_expr())
        return items[0] if len(items) == 1 else OrE(tuple(items))

    def and_expr(self):
        items = [self.unary()]
        while self.accept("&&"):
            items.append(self.unary())
        return items[0] if len(items) == 1 else AndE(tuple(items))

    def unary(self):
        if self.accept("!"):
            return NotE(self.unary())
        return self.relational()

    def relational(self):
        tok = self.peek()
        if tok.text == "(" or self.is_word("BOUND"):
            left = self.primary()
            if self.peek().kind == "op" and self.peek().text in ("=", "!=", "<", "<=", ">", ">="):
                self.error("comparison operands must be variables or constants")
            return left
        left = self.operand()
        op = self.peek()
        if op.kind != "op" or op.text not in ("=", "!=", "<", "<=", ">", ">="):
            self.error("expected comparison operator", op)
        self.take()
        return Cmp(op.text, left, self.operand())

    def primary(self):
        if self.accept_word("BOUND"):
            self.expect("(")
            tok = self.take()
            if tok.kind != "var":
                self.error("bound() takes a variable", tok)
            self.expect(")")
            return Bound(Var(tok.text[1:]))
        self.expect("(")
        e = self.or_expr()
        self.expect(")")
        return e

    def operand(self):
        tok = self.peek()
        if tok.kind == "var":
            self.take()
            return Var(tok.text[1:])
        if tok.kind == "word" and self.peek(1).text == "(":
            self.error(f"unsupported function {tok.text}()")
        self.check_unsupported()
        return self.constant("operand")


def parse_query(text: str, source: str | None = None, prefixes: dict[str, str] | None = None) -> Query:
    """Parse a SELECT query; see the module docstring for the accepted subset."""
    return _Parser(text, source, prefixes).parse()


def load_query(path, prefixes: dict[str, str] | None = None) -> Query:
    path = Path(path)
    return parse_query(path.read_text(encoding="utf-8"), str(path), prefixes)
