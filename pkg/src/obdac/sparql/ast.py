"""Graph patterns, filter expressions and queries of the supported SPARQL fragment."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterator

from ..terms import IRI, RDF_TYPE, format_term


@dataclass(frozen=True, order=True)
class Var:
    """A query variable; names starting with ``_:`` stand for blank nodes."""

    name: str

    def __str__(self) -> str:
        return "?" + self.name


def fmt(term: Any) -> str:
    return str(term) if isinstance(term, Var) else format_term(term)


@dataclass(frozen=True)
class Triple:
    s: Any
    p: Any
    o: Any

    def vars(self) -> tuple[Var, ...]:
        return tuple(dict.fromkeys(t for t in (self.s, self.p, self.o) if isinstance(t, Var)))

    def __str__(self) -> str:
        p = "a" if self.p == RDF_TYPE else fmt(self.p)
        return f"{fmt(self.s)} {p} {fmt(self.o)}"


# -- filter expressions ---------------------------------------------------------

@dataclass(frozen=True)
class Cmp:
    op: str  # = != < <= > >=
    left: Any
    right: Any

    def __str__(self) -> str:
        return f"{fmt(self.left)} {self.op} {fmt(self.right)}"


@dataclass(frozen=True)
class Bound:
    var: Var

    def __str__(self) -> str:
        return f"bound({self.var})"


@dataclass(frozen=True)
class NotE:
    item: Any

    def __str__(self) -> str:
        return f"!({self.item})"


@dataclass(frozen=True)
class AndE:
    items: tuple

    def __str__(self) -> str:
        return "(" + " && ".join(map(str, self.items)) + ")"


@dataclass(frozen=True)
class OrE:
    items: tuple

    def __str__(self) -> str:
        return "(" + " || ".join(map(str, self.items)) + ")"


def expr_vars(e) -> set[Var]:
    if isinstance(e, Cmp):
        return {x for x in (e.left, e.right) if isinstance(x, Var)}
    if isinstance(e, Bound):
        return {e.var}
    if isinstance(e, NotE):
        return expr_vars(e.item)
    if isinstance(e, (AndE, OrE)):
        return set().union(*(expr_vars(i) for i in e.items))
    raise TypeError(f"not a filter expression: {e!r}")


def conjuncts(e) -> list:
    if isinstance(e, AndE):
        return [c for i in e.items for c in conjuncts(i)]
    return [e]


def conjoin(items) -> Any:
    items = [c for i in items for c in conjuncts(i)]
    if not items:
        return None
    return items[0] if len(items) == 1 else AndE(tuple(items))


# -- graph patterns -------------------------------------------------------------

@dataclass(frozen=True)
class BGP:
    triples: tuple[Triple, ...] = ()


@dataclass(frozen=True)
class Filter:
    pattern: Any
    cond: Any


@dataclass(frozen=True)
class Bind:
    pattern: Any
    var: Var
    value: Any


@dataclass(frozen=True)
class Union:
    left: Any
    right: Any


@dataclass(frozen=True)
class Join:
    left: Any
    right: Any


@dataclass(frozen=True)
class Opt:
    left: Any
    right: Any
    cond: Any = None  # None means the always-true filter


Pattern = BGP | Filter | Bind | Union | Join | Opt


@dataclass(frozen=True)
class Query:
    pattern: Any
    projection: tuple[Var, ...] | None = None  # None = SELECT *

    @property
    def answer_vars(self) -> tuple[Var, ...]:
        if self.projection is not None:
            return self.projection
        return tuple(sorted(v for v in pattern_vars(self.pattern) if not v.name.startswith("_:")))


def pattern_vars(p) -> set[Var]:
    """Every variable that may be bound by ``p``."""
    if isinstance(p, BGP):
        return {v for t in p.triples for v in t.vars()}
    if isinstance(p, Filter):
        return pattern_vars(p.pattern)
    if isinstance(p, Bind):
        return pattern_vars(p.pattern) | {p.var}
    if isinstance(p, (Union, Join, Opt)):
        return pattern_vars(p.left) | pattern_vars(p.right)
    raise TypeError(f"not a graph pattern: {p!r}")


def certain_vars(p) -> set[Var]:
    """Variables bound in every solution of ``p``."""
    if isinstance(p, BGP):
        return pattern_vars(p)
    if isinstance(p, Filter):
        asserted = {c.var for c in conjuncts(p.cond) if isinstance(c, Bound)}
        return certain_vars(p.pattern) | (asserted & pattern_vars(p.pattern))
    if isinstance(p, Bind):
        return certain_vars(p.pattern) | {p.var}
    if isinstance(p, Join):
        return certain_vars(p.left) | certain_vars(p.right)
    if isinstance(p, Union):
        return certain_vars(p.left) & certain_vars(p.right)
    if isinstance(p, Opt):
        return certain_vars(p.left)
    raise TypeError(f"not a graph pattern: {p!r}")


def operator_count(p) -> int:
    if isinstance(p, BGP):
        return 0
    if isinstance(p, (Filter, Bind)):
        return 1 + operator_count(p.pattern)
    return 1 + operator_count(p.left) + operator_count(p.right)


def walk_patterns(p) -> Iterator:
    yield p
    if isinstance(p, (Filter, Bind)):
        yield from walk_patterns(p.pattern)
    elif isinstance(p, (Union, Join, Opt)):
        yield from walk_patterns(p.left)
        yield from walk_patterns(p.right)


def rewrite_predicates(p, table: dict[str, tuple[str, ...]]):
    """Replace each triple over a split predicate by the union of its renamings.

    Class atoms ``?x a :C`` are split on the object; property atoms on the
    predicate. A BGP with split atoms becomes a join of the untouched triples
    and one union per split atom.
    """
    if not table:
        return p
    if isinstance(p, BGP):
        keep, unions = [], []
        for t in p.triples:
            alts = _alternatives(t, table)
            if alts is None:
                keep.append(t)
                continue
            u = BGP((alts[0],))
            for a in alts[1:]:
                u = Union(u, BGP((a,)))
            unions.append(u)
        out = BGP(tuple(keep)) if keep or not unions else None
        for u in unions:
            out = u if out is None else Join(out, u)
        return out
    if isinstance(p, Filter):
        return Filter(rewrite_predicates(p.pattern, table), p.cond)
    if isinstance(p, Bind):
        return Bind(rewrite_predicates(p.pattern, table), p.var, p.value)
    cls = type(p)
    left, right = rewrite_predicates(p.left, table), rewrite_predicates(p.right, table)
    return Opt(left, right, p.cond) if cls is Opt else cls(left, right)


def _alternatives(t: Triple, table) -> list[Triple] | None:
    if t.p == RDF_TYPE and isinstance(t.o, IRI) and str(t.o) in table:
        return [Triple(t.s, t.p, IRI(n)) for n in table[str(t.o)]]
    if isinstance(t.p, IRI) and t.p != RDF_TYPE and str(t.p) in table:
        return [Triple(t.s, IRI(n), t.o) for n in table[str(t.p)]]
    return None


def format_pattern(p, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(p, BGP):
        body = " . ".join(map(str, p.triples))
        return f"{pad}BGP({body})"
    if isinstance(p, Filter):
        return f"{pad}Filter[{p.cond}]\n{format_pattern(p.pattern, indent + 1)}"
    if isinstance(p, Bind):
        return f"{pad}Bind[{p.var} := {fmt(p.value)}]\n{format_pattern(p.pattern, indent + 1)}"
    name = type(p).__name__
    if isinstance(p, Opt) and p.cond is not None:
        name += f"[{p.cond}]"
    return f"{pad}{name}\n{format_pattern(p.left, indent + 1)}\n{format_pattern(p.right, indent + 1)}"
