"""RDFS-style ontologies: subsumption closure, generators and ABox saturation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import ParseError
from .terms import IRI, RDF_TYPE, canonical_iri


@dataclass(frozen=True)
class SubClass:
    sub: str
    sup: str


@dataclass(frozen=True)
class SubProperty:
    sub: str
    sup: str


@dataclass(frozen=True)
class Domain:
    prop: str
    cls: str


@dataclass(frozen=True)
class Range:
    prop: str
    cls: str


Axiom = SubClass | SubProperty | Domain | Range


@dataclass(frozen=True)
class Ontology:
    class_names: frozenset[str] = frozenset()
    property_names: frozenset[str] = frozenset()
    axioms: tuple = ()

    def __post_init__(self):
        clash = self.class_names & self.property_names
        if clash:
            raise ParseError(f"names used both as class and property: {sorted(clash)}")
        for ax in self.axioms:
            if isinstance(ax, SubClass):
                names, kinds = (ax.sub, ax.sup), (self.class_names,) * 2
            elif isinstance(ax, SubProperty):
                names, kinds = (ax.sub, ax.sup), (self.property_names,) * 2
            elif isinstance(ax, (Domain, Range)):
                names, kinds = (ax.prop, ax.cls), (self.property_names, self.class_names)
            else:
                raise ParseError(f"unsupported axiom {ax!r}")
            for n, k in zip(names, kinds):
                if n not in k:
                    raise ParseError(f"axiom {ax} references undeclared name {n}")

    @classmethod
    def build(cls, axioms: Iterable, classes: Iterable[str] = (), properties: Iterable[str] = ()) -> "Ontology":
        """Create an ontology, declaring every name the axioms mention."""
        axioms = tuple(dict.fromkeys(axioms))
        cs, ps = set(classes), set(properties)
        for ax in axioms:
            if isinstance(ax, SubClass):
                cs |= {ax.sub, ax.sup}
            elif isinstance(ax, SubProperty):
                ps |= {ax.sub, ax.sup}
            else:
                ps.add(ax.prop)
                cs.add(ax.cls)
        return cls(frozenset(cs), frozenset(ps), axioms)

    def is_class(self, name: str) -> bool:
        return name in self.class_names


EMPTY_ONTOLOGY = Ontology()


@dataclass(frozen=True)
class Generator:
    """``target`` is populated by ``source`` at ``position``."""

    target: str
    source: str
    position: str  # "self" | "subject" | "object"


def _closure(pairs: Iterable[tuple[str, str]], names: Iterable[str]) -> dict[str, frozenset[str]]:
    """Map each name to everything below it (reflexive-transitive)."""
    below: dict[str, set[str]] = {n: {n} for n in names}
    direct: dict[str, set[str]] = {}
    for sub, sup in pairs:
        direct.setdefault(sup, set()).add(sub)
        below.setdefault(sub, {sub})
        below.setdefault(sup, {sup})
    out = {}
    for n in below:
        seen, stack = {n}, [n]
        while stack:
            cur = stack.pop()
            for s in direct.get(cur, ()):
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
        out[n] = frozenset(seen)
    return out


@dataclass
class Closure:
    ontology: Ontology
    subclasses: dict[str, frozenset[str]] = field(default_factory=dict)
    subproperties: dict[str, frozenset[str]] = field(default_factory=dict)

    def below(self, name: str) -> frozenset[str]:
        if name in self.subclasses:
            return self.subclasses[name]
        return self.subproperties.get(name, frozenset({name}))

    def subsumed(self, sub: str, sup: str) -> bool:
        return sub in self.below(sup)

    def generators(self, pred: str, is_class: bool | None = None) -> list[Generator]:
        """Every way ``pred`` can be populated, in deterministic order."""
        if is_class is None:
            is_class = pred in self.ontology.class_names
        below = self.below(pred)
        out = [Generator(pred, p, "self") for p in sorted(below)]
        if not is_class:
            return out
        for kind, position in ((Domain, "subject"), (Range, "object")):
            sources = set()
            for ax in self.ontology.axioms:
                if isinstance(ax, kind) and ax.cls in below:
                    sources |= self.below(ax.prop)
            out.extend(Generator(pred, p, position) for p in sorted(sources))
        return out


def classify(ont: Ontology) -> Closure:
    """Reflexive-transitive closure of class and property subsumption."""
    return Closure(
        ont,
        _closure(((a.sub, a.sup) for a in ont.axioms if isinstance(a, SubClass)), ont.class_names),
        _closure(((a.sub, a.sup) for a in ont.axioms if isinstance(a, SubProperty)), ont.property_names),
    )


def saturate_abox(ont: Ontology, assertions: Iterable[tuple]) -> frozenset[tuple]:
    """Least fixpoint of the four rule kinds over ``(s, p, o)`` triples.

    Class membership is encoded as ``(s, rdf:type, IRI(class))``. This is a
    naive forward-chaining loop, deliberately independent of :func:`classify`.
    """
    graph = set(assertions)
    while True:
        new = set()
        for s, p, o in graph:
            for ax in ont.axioms:
                if isinstance(ax, SubClass):
                    if p == RDF_TYPE and o == IRI(ax.sub):
                        new.add((s, RDF_TYPE, IRI(ax.sup)))
                elif isinstance(ax, SubProperty):
                    if p == IRI(ax.sub):
                        new.add((s, IRI(ax.sup), o))
                elif p == IRI(ax.prop):
                    if isinstance(ax, Domain):
                        new.add((s, RDF_TYPE, IRI(ax.cls)))
                    else:
                        new.add((o, RDF_TYPE, IRI(ax.cls)))
        if new <= graph:
            return frozenset(graph)
        graph |= new


# ---------------------------------------------------------------------------
# Line-oriented Turtle subset

_COMMENT_RE = re.compile(r"(^|\s)#.*$")
_PREFIX_RE = re.compile(r"^@?prefix\s+(\w*):\s*<([^>]*)>\s*\.?$", re.IGNORECASE)
_REJECT = {
    "owl:someValuesFrom": "existential restrictions are not supported",
    "owl:Restriction": "existential restrictions are not supported",
    "owl:onProperty": "existential restrictions are not supported",
    "owl:inverseOf": "inverse properties are not supported",
    "owl:disjointWith": "disjointness axioms are not supported",
    "owl:propertyDisjointWith": "disjointness axioms are not supported",
}
_DECL = {
    "owl:Class": "class", "rdfs:Class": "class",
    "owl:ObjectProperty": "property", "owl:DatatypeProperty": "property",
    "rdf:Property": "property",
}


def parse_ontology(text: str, source: str = "<ontology>") -> Ontology:
    prefixes: dict[str, str] = {}
    axioms: list = []
    classes: set[str] = set()
    props: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _COMMENT_RE.sub("", raw).strip()
        if not line:
            continue
        if m := _PREFIX_RE.match(line):
            prefixes[m.group(1)] = m.group(2)
            continue
        if "[" in line:
            raise ParseError("blank nodes / class expressions are not supported "
                             "(existential axioms are outside the supported fragment)",
                             lineno, line.index("[") + 1, source)
        if not line.endswith("."):
            raise ParseError("statement must end with '.'", lineno, len(line), source)
        parts = line[:-1].split()
        if len(parts) != 3:
            raise ParseError(f"expected 'subject predicate object .', got {line!r}", lineno, 1, source)
        s, p, o = (canonical_iri(x, prefixes) for x in parts)
        for term in (p, o):
            if term in _REJECT:
                raise ParseError(_REJECT[term], lineno, raw.find(parts[1 if term == p else 2]) + 1, source)
        if p in ("a", "rdf:type"):
            kind = _DECL.get(o)
            if kind is None:
                raise ParseError(f"unknown declaration type {o}", lineno, 1, source)
            (classes if kind == "class" else props).add(s)
        elif p == "rdfs:subClassOf":
            axioms.append(SubClass(s, o))
        elif p == "rdfs:subPropertyOf":
            axioms.append(SubProperty(s, o))
        elif p == "rdfs:domain":
            axioms.append(Domain(s, o))
        elif p == "rdfs:range":
            axioms.append(Range(s, o))
        elif p == "owl:equivalentClass":
            axioms += [SubClass(s, o), SubClass(o, s)]
        elif p == "owl:equivalentProperty":
            axioms += [SubProperty(s, o), SubProperty(o, s)]
        else:
            raise ParseError(f"unsupported axiom predicate {p}", lineno, raw.find(parts[1]) + 1, source)
    try:
        return Ontology.build(axioms, classes, props)
    except ParseError as exc:
        raise ParseError(exc.message, None, None, source) from None


def load_ontology(path: str | Path) -> Ontology:
    path = Path(path)
    return parse_ontology(path.read_text(encoding="utf-8"), str(path))


def format_ontology(ont: Ontology) -> str:
    lines = [f"{c} a owl:Class ." for c in sorted(ont.class_names)]
    lines += [f"{p} a rdf:Property ." for p in sorted(ont.property_names)]
    for ax in ont.axioms:
        if isinstance(ax, SubClass):
            lines.append(f"{ax.sub} rdfs:subClassOf {ax.sup} .")
        elif isinstance(ax, SubProperty):
            lines.append(f"{ax.sub} rdfs:subPropertyOf {ax.sup} .")
        elif isinstance(ax, Domain):
            lines.append(f"{ax.prop} rdfs:domain {ax.cls} .")
        else:
            lines.append(f"{ax.prop} rdfs:range {ax.cls} .")
    return "\n".join(lines) + "\n"
