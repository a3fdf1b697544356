"""RDF terms and scalar values shared by every layer.

Relational values are ``int``, ``str``, ``datetime.date`` or ``None`` (null).
RDF terms are :class:`IRI` instances, plain literals (``int``/``str``) and
:class:`TypedLiteral` values produced by typed literal templates.
"""

from __future__ import annotations

import datetime
from typing import Any, NamedTuple

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"


class IRI(str):
    """An IRI. Never equal to a plain string literal with the same text."""

    __slots__ = ()

    def __eq__(self, other: object) -> bool:
        return type(other) is IRI and str.__eq__(self, other)

    def __ne__(self, other: object) -> bool:
        return not self.__eq__(other)

    __hash__ = str.__hash__

    def __repr__(self) -> str:
        return f"<{str(self)}>"


class TypedLiteral(NamedTuple):
    lexical: str
    datatype: str

    def __str__(self) -> str:
        return f'"{self.lexical}"^^{self.datatype}'


RDF_TYPE = IRI("rdf:type")

# Well-known prefixed spellings normalized to one canonical form so that
# files with and without prefix declarations agree.
_CANONICAL = {
    RDF + "type": "rdf:type",
    RDFS + "subClassOf": "rdfs:subClassOf",
    RDFS + "subPropertyOf": "rdfs:subPropertyOf",
    RDFS + "domain": "rdfs:domain",
    RDFS + "range": "rdfs:range",
    OWL + "equivalentClass": "owl:equivalentClass",
    OWL + "equivalentProperty": "owl:equivalentProperty",
    XSD + "date": "xsd:date",
    XSD + "integer": "xsd:integer",
    XSD + "string": "xsd:string",
}


class ComparisonError(TypeError):
    """Raised when an ordering comparison mixes incomparable values."""


def canonical_iri(text: str, prefixes: dict[str, str] | None = None) -> str:
    """Stored form of an IRI reference.

    Prefixed names are kept as written, so every file must use the same
    prefix labels. A full ``<...>`` reference is compressed with the
    declared prefixes when one matches, so ``<http://x/A>`` and ``:A`` agree
    once ``:`` is bound to ``http://x/``.
    """
    if not (text.startswith("<") and text.endswith(">")):
        return text
    full = text[1:-1]
    if full in _CANONICAL:
        return _CANONICAL[full]
    best = None
    for pfx, ns in (prefixes or {}).items():
        if ns and full.startswith(ns) and (best is None or len(ns) > len(best[1])):
            best = (pfx, ns)
    if best is not None:
        return f"{best[0]}:{full[len(best[1]):]}"
    return full


def render_value(value: Any) -> str:
    """String form of a relational value when spliced into a template."""
    if isinstance(value, datetime.date):
        return value.isoformat()
    return str(value)


def column_term(value: Any) -> Any:
    """RDF literal for a raw column value (bare ``{attr}`` templates)."""
    if isinstance(value, datetime.date):
        return TypedLiteral(value.isoformat(), "xsd:date")
    return value


_RANK = {type(None): 0, bool: 1, int: 1, str: 2, datetime.date: 3, IRI: 4, TypedLiteral: 5}


def sort_key(value: Any) -> tuple:
    """Total order over heterogeneous values, used for deterministic output."""
    rank = _RANK.get(type(value), 9)
    if value is None:
        return (0, 0)
    if isinstance(value, TypedLiteral):
        return (rank, value.datatype, value.lexical)
    if rank == 9:
        return (9, repr(value))
    return (rank, value)


def row_key(row: tuple) -> tuple:
    return tuple(sort_key(v) for v in row)


def _comparable_kind(value: Any) -> str | None:
    if isinstance(value, IRI):
        return None
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return "num"
    if isinstance(value, str):
        return "str"
    if isinstance(value, datetime.date):
        return "date"
    if isinstance(value, TypedLiteral):
        return "typed:" + value.datatype
    return None


def less_than(left: Any, right: Any) -> bool:
    """Ordering used by ``<`` filters; mixed or unordered kinds raise."""
    kind = _comparable_kind(left)
    if kind is None or kind != _comparable_kind(right):
        raise ComparisonError(f"cannot order {left!r} and {right!r}")
    if isinstance(left, TypedLiteral):
        return left.lexical < right.lexical
    return left < right


def values_equal(left: Any, right: Any) -> bool:
    """Equality used by ``=`` filters: values of different kinds are unequal."""
    if type(left) is not type(right):
        if isinstance(left, int) and isinstance(right, int) and not isinstance(left, bool) and not isinstance(right, bool):
            return left == right
        return False
    return left == right


def format_term(term: Any) -> str:
    if term is None:
        return "UNBOUND"
    if isinstance(term, IRI):
        return str(term)
    if isinstance(term, TypedLiteral):
        return str(term)
    if isinstance(term, str):
        return f'"{term}"'
    return str(term)
