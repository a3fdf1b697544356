"""Readers for mapping files and constraint files.

Mapping file::

    @prefix : <http://example.org/> .
    map wb: :Wellbore-{wellbore_s} a :Wellbore <- SELECT * FROM wellbore
        WHERE r_existence_kd_nm = 'actual'
    map cd: :Wellbore-{wellbore_s} :completionDate "{year}-{month}-{day}"^^xsd:date <- SELECT ...

Indented lines continue the previous statement; ``#`` starts a comment line.

Constraint file::

    exact :Wellbore
    vfd branching :Wellbore-{} : :completionDate :isInWell
    vfd path :Person-{} : :friend :age
    oce domain :completionDate :Wellbore
"""

from __future__ import annotations

import re
from pathlib import Path

from ..errors import ParseError, SpecError
from ..ontology import Ontology, load_ontology
from ..relalg.schema import Schema, load_schema
from ..template import parse_template
from ..terms import canonical_iri
from .model import Constraints, Mapping, ObdaSpec, Oce, Vfd
from .sqlparse import build_body, parse_sql

_PREFIX_RE = re.compile(r"^@?prefix\s+(\w*):\s*<([^>]*)>\s*\.?\s*$", re.IGNORECASE)
_HEAD_TOKEN = re.compile(r'"(?:[^"\\]|\\.)*"(?:\^\^\S+)?|\S+')
_MAP_RE = re.compile(r"^map\s+([^\s:]+)\s*:\s*")


def _statements(text: str):
    """Yield ``(line, column offset, text)`` with continuation lines joined.

    Continuations are joined with a single space; diagnostics inside a
    continued statement therefore point at its first line.
    """
    current: list | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if raw[:1].isspace() and current is not None:
            current[2] += " " + stripped
            continue
        if current is not None:
            yield tuple(current)
        current = [lineno, len(raw) - len(raw.lstrip()), stripped]
    if current is not None:
        yield tuple(current)


def parse_mappings(text: str, schema: Schema, source: str = "<mappings>",
                   prefixes: dict[str, str] | None = None) -> tuple[tuple[Mapping, ...], dict[str, str]]:
    prefixes = dict(prefixes or {})
    out: list[Mapping] = []
    for lineno, indent, stmt in _statements(text):
        if m := _PREFIX_RE.match(stmt):
            prefixes[m.group(1)] = m.group(2)
            continue
        out.append(_parse_mapping(stmt, schema, source, lineno, indent, prefixes))
    return tuple(out), prefixes


def _parse_mapping(stmt: str, schema: Schema, source: str, lineno: int, indent: int,
                   prefixes: dict[str, str]) -> Mapping:
    m = _MAP_RE.match(stmt)
    if not m:
        raise ParseError("expected 'map <id>: <head> <- <SQL>'", lineno, indent + 1, source)
    mid = m.group(1)
    tokens = [(t.group(), t.start()) for t in _HEAD_TOKEN.finditer(stmt, m.end())]
    arrow = next((i for i, (t, _) in enumerate(tokens) if t == "<-"), None)
    if arrow is None:
        raise ParseError(f"mapping {mid}: missing '<-' before the body", lineno, indent + 1, source)
    head = tokens[:arrow]
    if len(head) != 3:
        raise ParseError(f"mapping {mid}: head must be 'subject predicate object'",
                         lineno, indent + m.end() + 1, source)
    body_start = tokens[arrow][1] + 2
    sql = stmt[body_start:]
    col = indent + body_start + (len(sql) - len(sql.lstrip()))

    def template(tok, pos):
        try:
            return parse_template(tok, prefixes)
        except ParseError as exc:
            raise ParseError(f"mapping {mid}: {exc.message}", lineno, indent + pos + 1, source) from None

    (s_txt, s_pos), (p_txt, p_pos), (o_txt, o_pos) = head
    subject = template(s_txt, s_pos)
    if p_txt in ("a", "rdf:type"):
        predicate = canonical_iri(o_txt, prefixes)
        obj = None
    else:
        predicate = canonical_iri(p_txt, prefixes)
        obj = template(o_txt, o_pos)
    if subject.kind != "iri":
        raise ParseError(f"mapping {mid}: subject must be an IRI template", lineno, indent + s_pos + 1, source)

    query = parse_sql(sql.strip(), schema, source, (lineno, col))
    outputs = {o for o, _ in query.select}
    attrs = list(dict.fromkeys(a for t in ((subject,) if obj is None else (subject, obj)) for a in t.attrs))
    missing = [a for a in attrs if a not in outputs]
    if missing:
        raise ParseError(f"mapping {mid}: template attributes {missing} are not selected by the body",
                         lineno, indent + s_pos + 1, source)
    body = build_body(query, schema, attrs)
    mapping = Mapping(mid, predicate, subject, obj, body)
    try:
        mapping.check()
    except SpecError as exc:
        raise ParseError(str(exc), lineno, indent + 1, source) from None
    return mapping


# ---------------------------------------------------------------------------
# Constraint files

def _vfd_template(text: str, prefixes: dict[str, str]):
    counter = iter(range(1, 1000))
    named = re.sub(r"\{\}", lambda _: "{_%d}" % next(counter), text)
    return parse_template(named, prefixes)


def parse_constraints(text: str, source: str = "<constraints>",
                      prefixes: dict[str, str] | None = None) -> Constraints:
    prefixes = dict(prefixes or {})
    exact: list[str] = []
    vfds: list[Vfd] = []
    oces: list[Oce] = []
    for lineno, indent, stmt in _statements(text):
        if m := _PREFIX_RE.match(stmt):
            prefixes[m.group(1)] = m.group(2)
            continue
        parts = stmt.split()
        kw = parts[0]
        if kw == "exact" and len(parts) == 2:
            exact.append(canonical_iri(parts[1], prefixes))
        elif kw == "vfd" and len(parts) >= 2:
            kind = parts[1]
            if kind not in ("branching", "path"):
                raise ParseError(f"unknown VFD kind {kind!r}", lineno, indent + stmt.index(kind) + 1, source)
            rest = stmt.split(None, 2)[2] if len(parts) > 2 else ""
            tpl_text, sep, props = rest.rpartition(" : ")
            if not sep or not props.split():
                raise ParseError("expected 'vfd <kind> <template> : P1 ... Pn'", lineno, indent + 1, source)
            try:
                tpl = _vfd_template(tpl_text.strip(), prefixes)
            except ParseError as exc:
                raise ParseError(exc.message, lineno, indent + 1, source) from None
            vfds.append(Vfd(kind, tpl, tuple(canonical_iri(p, prefixes) for p in props.split())))
        elif kw == "oce" and len(parts) == 4:
            if parts[1] not in ("domain", "range"):
                raise ParseError(f"unknown OCE kind {parts[1]!r}", lineno, indent + stmt.index(parts[1]) + 1,
                                 source)
            oces.append(Oce(parts[1], canonical_iri(parts[2], prefixes), canonical_iri(parts[3], prefixes)))
        else:
            raise ParseError(f"unrecognized constraint {stmt!r}", lineno, indent + 1, source)
    return Constraints(tuple(dict.fromkeys(exact)), tuple(dict.fromkeys(vfds)), tuple(dict.fromkeys(oces)))


# ---------------------------------------------------------------------------

def load_mappings(path: str | Path, schema: Schema) -> tuple[tuple[Mapping, ...], dict[str, str]]:
    path = Path(path)
    return parse_mappings(path.read_text(encoding="utf-8"), schema, str(path))


def load_constraints(path: str | Path, prefixes: dict[str, str] | None = None) -> Constraints:
    path = Path(path)
    return parse_constraints(path.read_text(encoding="utf-8"), str(path), prefixes)


def load_spec(schema_path: str | Path, ontology_path: str | Path | None,
              mapping_path: str | Path) -> ObdaSpec:
    schema = load_schema(schema_path)
    ontology = load_ontology(ontology_path) if ontology_path else Ontology()
    mappings, prefixes = load_mappings(mapping_path, schema)
    return ObdaSpec(ontology, mappings, schema, prefixes)
