"""Relational schemas, instances and their on-disk formats."""

from __future__ import annotations

import csv
import datetime
import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from ..errors import ParseError, SchemaError
from ..terms import row_key

ATTR_TYPES = ("int", "text", "date")


@dataclass(frozen=True)
class InclusionDep:
    """``relation[attrs] ⊆ target[target_attrs]``."""

    relation: str
    attrs: tuple[str, ...]
    target: str
    target_attrs: tuple[str, ...]

    def __str__(self) -> str:
        return (f"{self.relation}({', '.join(self.attrs)}) in "
                f"{self.target}({', '.join(self.target_attrs)})")


@dataclass(frozen=True)
class Schema:
    relations: Mapping[str, tuple[str, ...]]
    types: Mapping[str, Mapping[str, str]] = field(default_factory=dict)
    primary_keys: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    unique_constraints: Mapping[str, tuple[tuple[str, ...], ...]] = field(default_factory=dict)
    inclusion_deps: tuple[InclusionDep, ...] = ()

    def __post_init__(self):
        for rel, attrs in self.relations.items():
            if len(set(attrs)) != len(attrs):
                raise SchemaError(f"duplicate attribute in relation {rel}")
        for rel, key in self.primary_keys.items():
            if not key:
                raise SchemaError(f"empty primary key for {rel}")
            self._check_attrs(rel, key)
        for rel, sets in self.unique_constraints.items():
            for attrs in sets:
                if not attrs:
                    raise SchemaError(f"empty unique constraint for {rel}")
                self._check_attrs(rel, attrs)
        for dep in self.inclusion_deps:
            self._check_attrs(dep.relation, dep.attrs)
            self._check_attrs(dep.target, dep.target_attrs)
            if len(dep.attrs) != len(dep.target_attrs):
                raise SchemaError(f"arity mismatch in inclusion dependency {dep}")
        for rel, typemap in self.types.items():
            for attr, typ in typemap.items():
                self._check_attrs(rel, (attr,))
                if typ not in ATTR_TYPES:
                    raise SchemaError(f"unknown type {typ!r} for {rel}.{attr}")

    def _check_attrs(self, rel: str, attrs: Iterable[str]) -> None:
        if rel not in self.relations:
            raise SchemaError(f"unknown relation {rel!r}")
        known = self.relations[rel]
        for a in attrs:
            if a not in known:
                raise SchemaError(f"unknown attribute {rel}.{a}")

    def attributes(self, rel: str) -> tuple[str, ...]:
        try:
            return self.relations[rel]
        except KeyError:
            raise SchemaError(f"unknown relation {rel!r}") from None

    def type_of(self, rel: str, attr: str) -> str:
        return self.types.get(rel, {}).get(attr, "text")

    def keys(self, rel: str) -> list[tuple[str, ...]]:
        """Primary key first, then unique sets."""
        out = []
        if rel in self.primary_keys:
            out.append(tuple(self.primary_keys[rel]))
        out.extend(tuple(u) for u in self.unique_constraints.get(rel, ()))
        return out


class Instance:
    """A database instance: one set of tuples per relation of a schema."""

    def __init__(self, schema: Schema, data: Mapping[str, Iterable[Any]] | None = None):
        from .evaluate import Relation

        self.schema = schema
        self._relations: dict[str, Relation] = {}
        data = dict(data or {})
        for rel in data:
            if rel not in schema.relations:
                raise SchemaError(f"data for unknown relation {rel!r}")
        for rel, attrs in schema.relations.items():
            rows = data.get(rel, ())
            tuples = set()
            for row in rows:
                if isinstance(row, Mapping):
                    missing = set(row) - set(attrs)
                    if missing:
                        raise SchemaError(f"unknown attributes {sorted(missing)} in {rel}")
                    row = tuple(row.get(a) for a in attrs)
                else:
                    row = tuple(row)
                if len(row) != len(attrs):
                    raise SchemaError(f"arity mismatch for {rel}: {row!r}")
                tuples.add(row)
            self._relations[rel] = Relation(attrs, frozenset(tuples))
        self._check_keys()

    def _check_keys(self) -> None:
        for rel, key in self.schema.primary_keys.items():
            relation = self._relations[rel]
            idx = [relation.attrs.index(a) for a in key]
            seen = set()
            for row in relation.rows:
                k = tuple(row[i] for i in idx)
                if any(v is None for v in k):
                    raise SchemaError(f"null in primary key of {rel}: {row!r}")
                if k in seen:
                    raise SchemaError(f"duplicate primary key {k!r} in {rel}")
                seen.add(k)

    def relation(self, name: str):
        try:
            return self._relations[name]
        except KeyError:
            raise SchemaError(f"unknown relation {name!r}") from None

    def __getitem__(self, name: str):
        return self.relation(name)

    def __contains__(self, name: str) -> bool:
        return name in self._relations

    def row_counts(self) -> dict[str, int]:
        return {rel: len(r.rows) for rel, r in sorted(self._relations.items())}

    def fingerprint(self) -> str:
        """Content hash over every relation, independent of tuple order."""
        h = hashlib.sha256()
        for rel in sorted(self._relations):
            r = self._relations[rel]
            h.update(rel.encode())
            h.update(repr(r.attrs).encode())
            for row in sorted(r.rows, key=row_key):
                h.update(repr(row).encode())
        return h.hexdigest()[:16]

    def with_relations(self, extra: Mapping[str, Any]) -> "Instance":
        """Copy with some relations replaced (the schema must already declare them)."""
        data = {rel: r.rows for rel, r in self._relations.items()}
        data.update(extra)
        return Instance(self.schema, data)


# ---------------------------------------------------------------------------
# Schema text format
#
#   relation wellbore(wellbore_s text, year int, well_s text)
#   key wellbore(wellbore_s)
#   unique tab1(unique1)
#   include prod(wellbore_s) in wellbore(wellbore_s)

_REL_RE = re.compile(r"^relation\s+(\w+)\s*\((.*)\)\s*$")
_KEY_RE = re.compile(r"^(key|unique)\s+(\w+)\s*\((.*)\)\s*$")
_INC_RE = re.compile(r"^include\s+(\w+)\s*\((.*)\)\s+in\s+(\w+)\s*\((.*)\)\s*$")


def _names(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def parse_schema(text: str, source: str = "<schema>") -> Schema:
    relations: dict[str, tuple[str, ...]] = {}
    types: dict[str, dict[str, str]] = {}
    pks: dict[str, tuple[str, ...]] = {}
    uniques: dict[str, list[tuple[str, ...]]] = {}
    incs: list[InclusionDep] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _REL_RE.match(line):
            rel = m.group(1)
            if rel in relations:
                raise ParseError(f"relation {rel} declared twice", lineno, 1, source)
            attrs = []
            types[rel] = {}
            for part in _names(m.group(2)):
                bits = part.split()
                if len(bits) == 1:
                    attrs.append(bits[0])
                elif len(bits) == 2 and bits[1] in ATTR_TYPES:
                    attrs.append(bits[0])
                    types[rel][bits[0]] = bits[1]
                else:
                    raise ParseError(f"bad attribute declaration {part!r}", lineno, 1, source)
            relations[rel] = tuple(attrs)
        elif m := _KEY_RE.match(line):
            kind, rel, attrs = m.group(1), m.group(2), _names(m.group(3))
            if kind == "key":
                if rel in pks:
                    raise ParseError(f"second primary key for {rel}", lineno, 1, source)
                pks[rel] = attrs
            else:
                uniques.setdefault(rel, []).append(attrs)
        elif m := _INC_RE.match(line):
            incs.append(InclusionDep(m.group(1), _names(m.group(2)), m.group(3), _names(m.group(4))))
        else:
            raise ParseError(f"cannot parse schema line {line!r}", lineno, 1, source)
    try:
        return Schema(relations, types, pks, {k: tuple(v) for k, v in uniques.items()}, tuple(incs))
    except SchemaError as exc:
        raise ParseError(str(exc), None, None, source) from exc


def format_schema(schema: Schema) -> str:
    lines = []
    for rel, attrs in schema.relations.items():
        cols = ", ".join(f"{a} {schema.type_of(rel, a)}" for a in attrs)
        lines.append(f"relation {rel}({cols})")
    for rel, key in schema.primary_keys.items():
        lines.append(f"key {rel}({', '.join(key)})")
    for rel, sets in schema.unique_constraints.items():
        for attrs in sets:
            lines.append(f"unique {rel}({', '.join(attrs)})")
    for dep in schema.inclusion_deps:
        lines.append(f"include {dep}")
    return "\n".join(lines) + "\n"


def load_schema(path: str | Path) -> Schema:
    path = Path(path)
    return parse_schema(path.read_text(encoding="utf-8"), str(path))


# ---------------------------------------------------------------------------
# CSV instances: one ``<relation>.csv`` per relation, header row = attributes,
# empty field = null.

def convert_value(text: str, typ: str) -> Any:
    if text == "":
        return None
    if typ == "int":
        return int(text)
    if typ == "date":
        return datetime.date.fromisoformat(text)
    return text


def load_instance(schema: Schema, directory: str | Path) -> Instance:
    directory = Path(directory)
    data: dict[str, list[tuple]] = {}
    for rel, attrs in schema.relations.items():
        path = directory / f"{rel}.csv"
        if not path.exists():
            data[rel] = []
            continue
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                data[rel] = []
                continue
            if sorted(header) != sorted(attrs):
                raise SchemaError(f"{path}: header {header} does not match schema attributes {list(attrs)}")
            order = [header.index(a) for a in attrs]
            types = [schema.type_of(rel, a) for a in attrs]
            rows = []
            for lineno, rec in enumerate(reader, 2):
                if not rec:
                    continue
                if len(rec) != len(header):
                    raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields, got {len(rec)}")
                try:
                    rows.append(tuple(convert_value(rec[i], t) for i, t in zip(order, types)))
                except ValueError as exc:
                    raise SchemaError(f"{path}:{lineno}: {exc}") from None
            data[rel] = rows
    return Instance(schema, data)


def write_instance(instance: Instance, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for rel in instance.schema.relations:
        r = instance.relation(rel)
        with (directory / f"{rel}.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(r.attrs)
            for row in sorted(r.rows, key=row_key):
                writer.writerow(["" if v is None else (v.isoformat() if isinstance(v, datetime.date) else v)
                                 for v in row])
