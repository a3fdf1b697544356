"""Term templates: strings with attribute placeholders that build RDF terms.

Four kinds exist:

* ``iri``      ``:Wellbore-{wellbore_s}`` builds an :class:`IRI`
* ``literal``  ``"{year}-{month}"^^xsd:gYearMonth`` builds a (typed) literal
* ``column``   ``{attr}`` passes the raw column value through
* ``const``    a fixed term with no placeholders (used for BIND and constants)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Sequence

from .errors import ParseError
from .terms import IRI, TypedLiteral, canonical_iri, column_term, render_value

_PLACEHOLDER = re.compile(r"\{([A-Za-z_][\w.]*)\}")


@dataclass(frozen=True)
class Template:
    kind: str
    segments: tuple[str, ...] = ()
    attrs: tuple[str, ...] = ()
    datatype: str | None = None
    value: Any = None

    def __post_init__(self):
        if self.kind in ("iri", "literal") and len(self.segments) != len(self.attrs) + 1:
            raise ValueError("segments must interleave placeholders")
        if self.kind == "column" and len(self.attrs) != 1:
            raise ValueError("column template takes exactly one attribute")

    # -- constructors -----------------------------------------------------

    @classmethod
    def iri(cls, text: str) -> "Template":
        segs, attrs = _split(text)
        return cls("iri", segs, attrs)

    @classmethod
    def literal(cls, text: str, datatype: str | None = None) -> "Template":
        segs, attrs = _split(text)
        return cls("literal", segs, attrs, datatype)

    @classmethod
    def column(cls, attr: str) -> "Template":
        return cls("column", ("", ""), (attr,))

    @classmethod
    def constant(cls, value: Any) -> "Template":
        return cls("const", (), (), None, value)

    # -- behaviour ----------------------------------------------------------

    @property
    def arity(self) -> int:
        return len(self.attrs)

    @property
    def shape(self) -> tuple:
        """Two templates can produce a common value only if their shapes agree."""
        if self.kind == "const":
            return ("const", self.value)
        if self.kind == "column":
            return ("column",)
        return (self.kind, self.datatype, self.segments)

    def joinable(self, other: "Template") -> bool:
        return self.shape == other.shape

    def build(self, values: Sequence[Any]) -> Any:
        if self.kind == "const":
            return self.value
        if any(v is None for v in values):
            return None
        if self.kind == "column":
            return column_term(values[0])
        parts = [self.segments[0]]
        for v, seg in zip(values, self.segments[1:]):
            parts.append(render_value(v))
            parts.append(seg)
        text = "".join(parts)
        if self.kind == "iri":
            return IRI(text)
        return literal_value(text, self.datatype)

    def rename(self, mapping: dict[str, str]) -> "Template":
        if not self.attrs:
            return self
        return Template(self.kind, self.segments, tuple(mapping.get(a, a) for a in self.attrs),
                        self.datatype, self.value)

    def may_produce(self, term: Any, attr_types: Sequence[str] | None = None) -> bool:
        """Whether some attribute values could make this template build ``term``.

        ``attr_types`` (``int``/``text``/``date`` per attribute) sharpens the
        check for column templates; without it any literal is accepted.
        """
        if self.kind == "const":
            return self.value == term
        kinds = self.term_kinds(attr_types)
        if term_kind(term) not in kinds:
            return False
        if self.kind == "column":
            return True
        text = term.lexical if isinstance(term, TypedLiteral) else str(term)
        if isinstance(term, TypedLiteral) and term.datatype != self.datatype:
            return False
        pattern = "".join(re.escape(s) + ("(.*)" if i < len(self.attrs) else "")
                          for i, s in enumerate(self.segments))
        return re.fullmatch(pattern, text, re.DOTALL) is not None

    def term_kinds(self, attr_types: Sequence[str] | None = None) -> frozenset[str]:
        """Kinds of RDF term this template can build (see :func:`term_kind`)."""
        if self.kind == "const":
            return frozenset({term_kind(self.value)})
        if self.kind == "iri":
            return frozenset({"iri"})
        if self.kind == "literal":
            if self.datatype in (None, "xsd:string"):
                return frozenset({"str"})
            if self.datatype == "xsd:integer":
                return frozenset({"int", "typed:xsd:integer"})
            return frozenset({"typed:" + self.datatype})
        typ = attr_types[0] if attr_types else None
        return _COLUMN_KINDS.get(typ, frozenset({"int", "str", "typed:xsd:date"}))

    def __str__(self) -> str:
        if self.kind == "const":
            return const_text(self.value)
        if self.kind == "column":
            return "{" + self.attrs[0] + "}"
        body = self.segments[0] + "".join("{" + a + "}" + s for a, s in zip(self.attrs, self.segments[1:]))
        if self.kind == "iri":
            return body
        return f'"{body}"' + (f"^^{self.datatype}" if self.datatype else "")

    def skeleton(self) -> str:
        """Rendering with placeholders blanked, e.g. ``:Wellbore-{}``."""
        if self.kind in ("iri", "literal"):
            body = "{}".join(self.segments)
            return body if self.kind == "iri" else f'"{body}"' + (f"^^{self.datatype}" if self.datatype else "")
        return str(self) if self.kind == "const" else "{}"


_COLUMN_KINDS = {"int": frozenset({"int"}), "text": frozenset({"str"}),
                 "date": frozenset({"typed:xsd:date"})}


def term_kind(term: Any) -> str:
    """Coarse kind of an RDF term: ``iri``, ``int``, ``str`` or ``typed:<datatype>``."""
    if isinstance(term, IRI):
        return "iri"
    if isinstance(term, TypedLiteral):
        return "typed:" + term.datatype
    if isinstance(term, int):
        return "int"
    if isinstance(term, str):
        return "str"
    return "other"


def literal_value(text: str, datatype: str | None) -> Any:
    if datatype is None or datatype == "xsd:string":
        return text
    if datatype == "xsd:integer":
        try:
            return int(text)
        except ValueError:
            pass
    return TypedLiteral(text, datatype)


def const_text(value: Any) -> str:
    if isinstance(value, IRI):
        return str(value)
    if isinstance(value, TypedLiteral):
        return f'"{value.lexical}"^^{value.datatype}'
    if isinstance(value, str):
        return f'"{value}"'
    return str(value)


def _split(text: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    segs, attrs, pos = [], [], 0
    for m in _PLACEHOLDER.finditer(text):
        segs.append(text[pos:m.start()])
        attrs.append(m.group(1))
        pos = m.end()
    segs.append(text[pos:])
    rest = "".join(segs)
    if "{" in rest or "}" in rest:
        raise ParseError(f"malformed placeholder in template {text!r}")
    return tuple(segs), tuple(attrs)


_LITERAL_RE = re.compile(r'^"((?:[^"\\]|\\.)*)"(?:\^\^(\S+))?$')


def parse_template(text: str, prefixes: dict[str, str] | None = None) -> Template:
    """Parse the surface syntax of a template or constant term."""
    text = text.strip()
    if not text:
        raise ParseError("empty template")
    m = _LITERAL_RE.match(text)
    if m:
        dt = canonical_iri(m.group(2), prefixes) if m.group(2) else None
        return Template.literal(m.group(1), dt)
    if re.fullmatch(r"\{[A-Za-z_][\w.]*\}", text):
        return Template.column(text[1:-1])
    if re.fullmatch(r"-?\d+", text):
        return Template.constant(int(text))
    if (text.startswith("<") and text.endswith(">")) or ":" in text:
        return Template.iri(canonical_iri(text, prefixes))
    raise ParseError(f"cannot parse template {text!r}")
