"""Virtual assertions, T-mapping saturation, exact predicates and template splitting."""

from __future__ import annotations

from typing import Iterable

from ..errors import SpecError
from ..ontology import Ontology, classify
from ..relalg.evaluate import Evaluator
from ..terms import IRI, RDF_TYPE
from .model import Mapping, PredicateDef


def virtual_assertions(mappings: Iterable[Mapping], inst) -> frozenset[tuple]:
    """The RDF triples produced by ``mappings`` over ``inst``.

    Rows where a template attribute is null produce nothing, which the
    σ_notNull in every body already guarantees; the check here is a backstop
    for hand-built bodies.
    """
    ev = Evaluator(inst)
    out = set()
    for m in mappings:
        rel = ev(m.body)
        idx = {a: i for i, a in enumerate(rel.attrs)}
        s_pos = [idx[a] for a in m.subject.attrs]
        o_pos = [idx[a] for a in m.obj.attrs] if m.obj is not None else []
        pred = IRI(m.predicate)
        for row in rel.rows:
            s = m.subject.build([row[i] for i in s_pos])
            if s is None:
                continue
            if m.obj is None:
                out.add((s, RDF_TYPE, pred))
                continue
            o = m.obj.build([row[i] for i in o_pos])
            if o is not None:
                out.add((s, pred, o))
    return frozenset(out)


def _derived(target: str, source: Mapping, position: str) -> Mapping:
    if position == "self":
        return Mapping(f"{source.id}>{target}", target, source.subject, source.obj, source.body)
    tpl = source.subject if position == "subject" else source.obj
    return Mapping(f"{source.id}>{position}>{target}", target, tpl, None, source.body)


def saturate_tmappings(ont: Ontology, mappings: Iterable[Mapping]) -> tuple[Mapping, ...]:
    """Original mappings followed by the distinct mappings inferred from the ontology.

    Derived mappings keep the generating mapping's full body. Two derived
    mappings with the same head templates and body are merged; originals are
    kept as written even when a derived mapping coincides with one.
    """
    mappings = tuple(mappings)
    closure = classify(ont)
    by_pred: dict[str, list[Mapping]] = {}
    for m in mappings:
        by_pred.setdefault(m.predicate, []).append(m)
    preds = dict.fromkeys(sorted(set(ont.class_names) | set(ont.property_names) | set(by_pred)))
    derived: dict[tuple, Mapping] = {}
    for target in preds:
        is_class = target in ont.class_names or any(m.is_class for m in by_pred.get(target, ()))
        for gen in closure.generators(target, is_class):
            if gen.position == "self" and gen.source == target:
                continue
            for m in by_pred.get(gen.source, ()):
                if gen.position != "self" and m.is_class:
                    continue
                d = _derived(target, m, gen.position)
                derived.setdefault((d.predicate, d.subject, d.obj, d.body), d)
    return mappings + tuple(derived.values())


def apply_exact_predicates(tmaps: Iterable[Mapping], exact: Iterable[str],
                           originals: Iterable[Mapping]) -> tuple[Mapping, ...]:
    """Replace the T-mappings of every exact predicate by its original mappings."""
    exact = set(exact)
    originals = tuple(originals)
    own = {p: [m for m in originals if m.predicate == p] for p in exact}
    for p, ms in sorted(own.items()):
        if not ms:
            raise SpecError(f"exact predicate {p} has no mapping of its own")
    out = [m for m in tmaps if m.predicate not in exact]
    for p in sorted(exact):
        out.extend(own[p])
    return tuple(out)


def split_multi_template(tmaps: Iterable[Mapping]) -> tuple[tuple[Mapping, ...], dict[str, tuple[str, ...]]]:
    """Give every predicate a single template pair by introducing fresh predicates.

    A predicate whose mappings use k distinct template shapes becomes
    ``P#1 .. P#k`` (numbered by first occurrence). The returned table maps
    each split predicate to its fresh names; basic predicates are absent.
    """
    tmaps = tuple(tmaps)
    groups: dict[str, list[tuple]] = {}
    for m in tmaps:
        keys = groups.setdefault(m.predicate, [])
        if m.template_key not in keys:
            keys.append(m.template_key)
    table = {p: tuple(f"{p}#{i}" for i in range(1, len(keys) + 1))
             for p, keys in groups.items() if len(keys) > 1}
    out = []
    for m in tmaps:
        if m.predicate in table:
            name = table[m.predicate][groups[m.predicate].index(m.template_key)]
            m = Mapping(m.id, name, m.subject, m.obj, m.body)
        out.append(m)
    return tuple(out), table


def group_definitions(tmaps: Iterable[Mapping], table: dict[str, tuple[str, ...]] | None = None
                      ) -> dict[str, PredicateDef]:
    """Collect basic T-mappings into one definition per predicate."""
    origin = {new: old for old, news in (table or {}).items() for new in news}
    members: dict[str, list[Mapping]] = {}
    for m in tmaps:
        members.setdefault(m.predicate, []).append(m)
    out = {}
    for name, ms in members.items():
        if len({m.template_key for m in ms}) > 1:
            raise SpecError(f"predicate {name} is not basic; split it first")
        out[name] = PredicateDef(name, origin.get(name, name), tuple(dict.fromkeys(ms)))
    return out
