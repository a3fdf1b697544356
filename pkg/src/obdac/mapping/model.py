"""Mappings, OBDA specifications and the constraint component."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..errors import SpecError
from ..ontology import EMPTY_ONTOLOGY, Ontology
from ..relalg.expr import EquiJoin, Project, Rename, Union, output_attrs
from ..relalg.schema import Schema
from ..template import Template


@dataclass(frozen=True)
class Mapping:
    """``pred(subject[, obj]) <- body``; ``obj`` is None for class mappings."""

    id: str
    predicate: str
    subject: Template
    obj: Template | None
    body: Any

    @property
    def is_class(self) -> bool:
        return self.obj is None

    @property
    def templates(self) -> tuple[Template, ...]:
        return (self.subject,) if self.obj is None else (self.subject, self.obj)

    @property
    def template_attrs(self) -> tuple[str, ...]:
        out: list[str] = []
        for t in self.templates:
            out.extend(a for a in t.attrs if a not in out)
        return tuple(out)

    @property
    def template_key(self) -> tuple:
        return tuple(t.shape for t in self.templates)

    def head(self) -> str:
        if self.obj is None:
            return f"{self.subject} a {self.predicate}"
        return f"{self.subject} {self.predicate} {self.obj}"

    def check(self) -> None:
        attrs = output_attrs(self.body)
        missing = set(self.template_attrs) - set(attrs)
        if missing:
            raise SpecError(f"mapping {self.id}: template attributes {sorted(missing)} not in body output")
        for t in self.templates:
            if t.kind == "const":
                raise SpecError(f"mapping {self.id}: constant terms are not allowed in mapping heads")


@dataclass(frozen=True)
class PredicateDef:
    """One basic predicate after splitting: all members share one template pair."""

    name: str
    original: str
    members: tuple[Mapping, ...]

    @property
    def is_class(self) -> bool:
        return self.members[0].is_class

    @property
    def subject(self) -> Template:
        return self.members[0].subject

    @property
    def obj(self) -> Template | None:
        return self.members[0].obj

    @property
    def uniform(self) -> bool:
        """Whether every member repeats placeholders exactly as the first one does."""
        return len({_repetition(m) for m in self.members}) == 1

    def head(self) -> tuple[Template, Template | None]:
        """Subject and object templates over the attributes of :meth:`body`."""
        first = self.members[0]
        if self.uniform:
            return first.subject, first.obj
        names = iter(_positional(first))
        out = []
        for t in first.templates:
            out.append(Template(t.kind, t.segments, tuple(next(names) for _ in t.attrs), t.datatype, t.value))
        return out[0], (out[1] if len(out) > 1 else None)

    def body(self) -> Any:
        """The single logical body: the member body, or a union of projections.

        When members repeat placeholders differently, every template position
        gets its own attribute and repeated columns are copied by an equi-join
        of the body with its own projection.
        """
        first = self.members[0]
        if len(self.members) == 1:
            return first.body
        branches = []
        if self.uniform:
            names = first.template_attrs
            for m in self.members:
                own = m.template_attrs
                expr = Project(own, m.body)
                pairs = tuple((n, o) for n, o in zip(names, own) if n != o)
                branches.append(Rename(pairs, expr) if pairs else expr)
        else:
            names = _positional(first)
            for m in self.members:
                flat = [a for t in m.templates for a in t.attrs]
                seen: dict[str, str] = {}
                for n, a in zip(names, flat):
                    seen.setdefault(a, n)
                expr = Rename(tuple((n, a) for a, n in seen.items()), Project(tuple(seen), m.body))
                for n, a in zip(names, flat):
                    if seen[a] != n:
                        copy = Rename(((n, a),), Project((a,), m.body))
                        expr = EquiJoin(expr, copy, ((seen[a], n),))
                branches.append(Project(names, expr))
        return Union(tuple(dict.fromkeys(branches)))


def _repetition(m: Mapping) -> tuple[int, ...]:
    flat = [a for t in m.templates for a in t.attrs]
    return tuple(flat.index(a) for a in flat)


def _positional(m: Mapping) -> tuple[str, ...]:
    return tuple(f"_{i}" for i in range(1, sum(len(t.attrs) for t in m.templates) + 1))


@dataclass(frozen=True)
class ObdaSpec:
    ontology: Ontology
    mappings: tuple[Mapping, ...]
    schema: Schema
    prefixes: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        ids = [m.id for m in self.mappings]
        dup = {i for i in ids if ids.count(i) > 1}
        if dup:
            raise SpecError(f"duplicate mapping ids {sorted(dup)}")
        for m in self.mappings:
            m.check()
            if m.is_class and m.predicate in self.ontology.property_names:
                raise SpecError(f"mapping {m.id}: {m.predicate} is a property in the ontology")
            if not m.is_class and m.predicate in self.ontology.class_names:
                raise SpecError(f"mapping {m.id}: {m.predicate} is a class in the ontology")

    def predicates(self) -> dict[str, bool]:
        """Every predicate name mapped or declared, with its class flag."""
        out = {c: True for c in self.ontology.class_names}
        out.update({p: False for p in self.ontology.property_names})
        for m in self.mappings:
            out.setdefault(m.predicate, m.is_class)
        return dict(sorted(out.items()))


@dataclass(frozen=True)
class Vfd:
    """Optimizing VFD: ``template ->kind properties``; the first property anchors."""

    kind: str  # "branching" | "path"
    template: Template
    properties: tuple[str, ...]

    def __str__(self) -> str:
        return f"vfd {self.kind} {self.template.skeleton()} : {' '.join(self.properties)}"

    @classmethod
    def over(cls, kind: str, template: Template, properties) -> "Vfd":
        """VFD whose template is ``template`` with placeholders renamed as a parsed file would."""
        names = {a: f"_{i}" for i, a in enumerate(template.attrs, 1)}
        return cls(kind, template.rename(names), tuple(properties))


@dataclass(frozen=True)
class Oce:
    """Class ``cls`` covers the domain (or range) individuals of ``prop``."""

    kind: str  # "domain" | "range"
    prop: str
    cls: str

    def __str__(self) -> str:
        return f"oce {self.kind} {self.prop} {self.cls}"


@dataclass(frozen=True)
class Constraints:
    exact: tuple[str, ...] = ()
    vfds: tuple[Vfd, ...] = ()
    oces: tuple[Oce, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.exact or self.vfds or self.oces)

    def format(self) -> str:
        lines = [f"exact {p}" for p in self.exact]
        lines += [str(v) for v in self.vfds]
        lines += [str(o) for o in self.oces]
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class ConstrainedSpec:
    spec: ObdaSpec
    constraints: Constraints = Constraints()

    def __post_init__(self):
        preds = self.spec.predicates()
        for p in self.constraints.exact:
            if p not in preds:
                raise SpecError(f"exact predicate {p} is not declared")
        for v in self.constraints.vfds:
            if v.kind not in ("branching", "path"):
                raise SpecError(f"unknown VFD kind {v.kind!r}")
            for p in v.properties:
                if preds.get(p, True):
                    raise SpecError(f"VFD property {p} is not a declared property")
        for o in self.constraints.oces:
            if o.kind not in ("domain", "range"):
                raise SpecError(f"unknown OCE kind {o.kind!r}")
            if preds.get(o.prop, True):
                raise SpecError(f"OCE property {o.prop} is not a declared property")
            if not preds.get(o.cls, False):
                raise SpecError(f"OCE class {o.cls} is not a declared class")


def empty_spec(schema: Schema) -> ObdaSpec:
    return ObdaSpec(EMPTY_ONTOLOGY, (), schema)
