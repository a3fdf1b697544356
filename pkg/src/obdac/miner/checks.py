"""Extensional checks of exactness, VFDs and OCEs over one instance.

Every check works on RDF terms built by the mapping templates rather than on
raw attribute values, so it tests exactly what the compiled query relies on.
Whenever the compiler may read more than one set of definitions (the
saturated T-mappings, and those with exact predicates applied), a VFD or OCE
must hold under each of them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..mapping.model import ObdaSpec, Oce, PredicateDef, Vfd
from ..mapping.tmappings import (apply_exact_predicates, group_definitions, saturate_tmappings,
                                 split_multi_template, virtual_assertions)
from ..ontology import saturate_abox
from ..relalg.evaluate import Evaluator
from ..relalg.expr import output_attrs
from ..terms import IRI, RDF_TYPE, format_term, row_key


@dataclass(frozen=True)
class Finding:
    """Outcome of checking one candidate constraint."""

    constraint: str
    certified: bool
    evidence: tuple[str, ...] = ()
    witness: str | None = None


def _fmt(values) -> str:
    return "(" + ", ".join("NULL" if v is None else format_term(v) for v in values) + ")"


class DefinitionSet:
    """Basic definitions after saturation, optional exact pruning and splitting."""

    def __init__(self, label: str, tmaps):
        renamed, table = split_multi_template(tmaps)
        self.label = label
        self.defs = group_definitions(renamed, table)
        self.split = set(table)

    def get(self, name: str, is_class: bool) -> PredicateDef | None:
        d = self.defs.get(name)
        return d if d is not None and d.is_class == is_class else None


class Context:
    """One specification over one instance, with evaluated bodies cached."""

    def __init__(self, spec: ObdaSpec, inst, exact=(), evaluator: Evaluator | None = None):
        self.spec = spec
        self.inst = inst
        self.ev = evaluator or Evaluator(inst)
        self.exact = tuple(exact)
        tmaps = saturate_tmappings(spec.ontology, spec.mappings)
        self.sets = [DefinitionSet("saturated", tmaps)]
        if self.exact:
            self.sets.append(DefinitionSet("exact", apply_exact_predicates(tmaps, self.exact, spec.mappings)))
        self._ext: dict = {}
        self._anchor: dict = {}
        self._graph = None

    @property
    def saturated(self) -> DefinitionSet:
        return self.sets[0]

    def with_exact(self, exact) -> "Context":
        """Same instance and caches, checking against ``exact`` as well."""
        ctx = Context(self.spec, self.inst, exact, self.ev)
        ctx._ext, ctx._anchor, ctx._graph = self._ext, self._anchor, self._graph
        return ctx

    def graph(self) -> frozenset:
        if self._graph is None:
            self._graph = saturate_abox(self.spec.ontology, virtual_assertions(self.spec.mappings, self.inst))
        return self._graph

    def extension(self, d: PredicateDef) -> frozenset[tuple]:
        """``(s, o)`` pairs of a property or ``(s,)`` tuples of a class."""
        subject, obj = d.head()
        key = (d.body(), subject, obj)
        hit = self._ext.get(key)
        if hit is None:
            rel = self.ev(d.body())
            idx = {a: i for i, a in enumerate(rel.attrs)}
            out = set()
            for row in rel.rows:
                s = subject.build([row[idx[a]] for a in subject.attrs])
                if s is None:
                    continue
                if obj is None:
                    out.add((s,))
                    continue
                o = obj.build([row[idx[a]] for a in obj.attrs])
                if o is not None:
                    out.add((s, o))
            hit = self._ext[key] = frozenset(out)
        return hit

    def anchor_rows(self, anchor: PredicateDef, objects) -> frozenset[tuple]:
        """``(s, o1, .., on)`` built from the anchor body alone; unbuildable terms are None."""
        objects = tuple(objects)
        subject = anchor.head()[0]
        key = (anchor.body(), subject, objects)
        hit = self._anchor.get(key)
        if hit is None:
            rel = self.ev(anchor.body())
            idx = {a: i for i, a in enumerate(rel.attrs)}
            out = set()
            for row in rel.rows:
                terms = [subject.build([row[idx[a]] for a in subject.attrs])]
                terms += [t.build([row[idx[a]] for a in t.attrs]) for t in objects]
                if terms[0] is None or terms[1] is None:
                    continue
                out.add(tuple(terms))
            hit = self._anchor[key] = frozenset(out)
        return hit


def _first(items):
    return min(items, key=row_key)


def _missing_attrs(anchor: PredicateDef, objects) -> list[str]:
    have = set(output_attrs(anchor.body()))
    need = list(anchor.head()[0].attrs) + [a for t in objects for a in t.attrs]
    return [a for a in dict.fromkeys(need) if a not in have]


# ---------------------------------------------------------------------------
# exact predicates

def check_exact(ctx: Context, pred: str) -> Finding:
    name = f"exact {pred}"
    own = [m for m in ctx.spec.mappings if m.predicate == pred]
    if not own:
        return Finding(name, False, ("no mapping of its own",))
    is_class = own[0].is_class

    def select(graph):
        if is_class:
            return {t for t in graph if t[1] == RDF_TYPE and t[2] == IRI(pred)}
        return {t for t in graph if t[1] == IRI(pred)}

    full = select(ctx.graph())
    mine = select(virtual_assertions(own, ctx.inst))
    evidence = (f"{len(mine)} facts from its own mappings, {len(full)} after reasoning",)
    extra = full - mine
    if extra:
        return Finding(name, False, evidence, "inferred but not mapped: " + _fmt(_first(extra)))
    return Finding(name, True, evidence)


# ---------------------------------------------------------------------------
# VFDs

def _fd_witness(pairs) -> str | None:
    """Two facts with the same subject and different objects, if any."""
    seen: dict = {}
    for s, *rest in sorted(pairs, key=row_key):
        rest = tuple(rest)
        prev = seen.setdefault(s, rest)
        if prev != rest:
            return f"{_fmt((s,) + prev)} and {_fmt((s,) + rest)}"
    return None


def _paths(ctx: Context, defs: list[PredicateDef]) -> frozenset[tuple]:
    paths = {(s, o) for s, o in ctx.extension(defs[0])}
    for d in defs[1:]:
        step: dict = {}
        for s, o in ctx.extension(d):
            step.setdefault(s, []).append(o)
        paths = {p + (o,) for p in paths for o in step.get(p[-1], ())}
    return frozenset(paths)


def _structure(ctx: Context, vfd: Vfd) -> tuple[list[list[PredicateDef]], str | None]:
    """Definitions of the VFD's properties in every definition set, or a rejection reason."""
    if len(set(vfd.properties)) != len(vfd.properties):
        return [], "a property is repeated"
    out = []
    for dset in ctx.sets:
        defs = []
        for p in vfd.properties:
            d = dset.get(p, False)
            if d is None:
                why = "is split by template" if p in dset.split else "has no property mapping"
                return [], f"{p} {why}"
            defs.append(d)
        if vfd.kind == "branching":
            for p, d in zip(vfd.properties, defs):
                if d.subject.shape != vfd.template.shape:
                    return [], f"subjects of {p} are not built by {vfd.template.skeleton()}"
        else:
            if defs[0].subject.shape != vfd.template.shape:
                return [], f"subjects of {vfd.properties[0]} are not built by {vfd.template.skeleton()}"
            for (a, da), (b, db) in zip(zip(vfd.properties, defs), zip(vfd.properties[1:], defs[1:])):
                if da.obj.shape != db.subject.shape:
                    return [], f"objects of {a} are not subjects of {b}"
        out.append(defs)
    return out, None


def check_vfd(ctx: Context, vfd: Vfd) -> Finding:
    """Satisfaction plus the optimizing precondition, in every definition set."""
    name = str(vfd)
    per_set, reason = _structure(ctx, vfd)
    if reason:
        return Finding(name, False, (reason,))
    evidence: list[str] = []
    sat = per_set[0]
    if vfd.kind == "branching":
        for p, d in zip(vfd.properties, sat):
            w = _fd_witness(ctx.extension(d))
            if w:
                return Finding(name, False, tuple(evidence) + (f"{p} is multi-valued",), w)
            evidence.append(f"FD holds for {p} ({len(ctx.extension(d))} facts)")
    else:
        w = _fd_witness(_paths(ctx, sat))
        if w:
            return Finding(name, False, ("the chain has two paths from one subject",), w)
        evidence.append(f"FD holds on the chain join ({len(_paths(ctx, sat))} paths)")
    for dset, defs in zip(ctx.sets, per_set):
        anchor = defs[0]
        objects = [d.head()[1] for d in defs]
        missing = _missing_attrs(anchor, objects)
        if missing:
            return Finding(name, False, tuple(evidence) + (
                f"[{dset.label}] the body of {vfd.properties[0]} does not expose {', '.join(missing)}",))
        rows = ctx.anchor_rows(anchor, objects)
        if vfd.kind == "branching":
            for i, (p, d) in enumerate(zip(vfd.properties, defs), 1):
                proj = {(r[0], r[i]) for r in rows}
                if d.body() == anchor.body() and d.head()[0].attrs == anchor.head()[0].attrs \
                        and all(r[i] is not None for r in rows):
                    evidence.append(f"[{dset.label}] {p} reads the anchor body itself")
                    continue
                extra = proj - ctx.extension(d)
                if extra:
                    return Finding(name, False, tuple(evidence) + (
                        f"[{dset.label}] anchor rows are not all {p} facts",), _fmt(_first(extra)))
                evidence.append(f"[{dset.label}] anchor rows are contained in {p}")
        else:
            extra = rows - _paths(ctx, defs)
            if extra:
                return Finding(name, False, tuple(evidence) + (
                    f"[{dset.label}] anchor rows are not all chain paths",), _fmt(_first(extra)))
            evidence.append(f"[{dset.label}] anchor rows are contained in the chain join")
    return Finding(name, True, tuple(evidence))


def lemma_violation(ctx: Context, vfd: Vfd) -> str | None:
    """Whether the anchor body alone equals the join of all the properties.

    This is the identity the rewrite depends on: for a branching VFD the
    anchor rows must equal the join of every property on the subject, for a
    path VFD the chain join. Returns a description of a differing tuple.
    """
    per_set, reason = _structure(ctx, vfd)
    if reason:
        return reason
    for dset, defs in zip(ctx.sets, per_set):
        objects = [d.head()[1] for d in defs]
        missing = _missing_attrs(defs[0], objects)
        if missing:
            return f"[{dset.label}] the body of {vfd.properties[0]} does not expose {', '.join(missing)}"
        rows = ctx.anchor_rows(defs[0], objects)
        if vfd.kind == "branching":
            by_subject = []
            for d in defs:
                idx: dict = {}
                for s, o in ctx.extension(d):
                    idx.setdefault(s, []).append(o)
                by_subject.append(idx)
            joined = set()
            for s in by_subject[0]:
                lists = [idx.get(s, ()) for idx in by_subject]
                joined.update((s,) + combo for combo in itertools.product(*lists))
        else:
            joined = set(_paths(ctx, defs))
        if rows != joined:
            left, right = rows - joined, joined - rows
            if left:
                return f"[{dset.label}] only from the anchor: {_fmt(_first(left))}"
            return f"[{dset.label}] only from the join: {_fmt(_first(right))}"
    return None


# ---------------------------------------------------------------------------
# OCEs

def check_oce(ctx: Context, oce: Oce) -> Finding:
    name = str(oce)
    evidence = []
    for dset in ctx.sets:
        cls = dset.get(oce.cls, True)
        prop = dset.get(oce.prop, False)
        if cls is None:
            why = "is split by template" if oce.cls in dset.split else "has no class mapping"
            return Finding(name, False, (f"{oce.cls} {why}",))
        if prop is None:
            why = "is split by template" if oce.prop in dset.split else "has no property mapping"
            return Finding(name, False, (f"{oce.prop} {why}",))
        tpl = prop.subject if oce.kind == "domain" else prop.obj
        if cls.subject.shape != tpl.shape:
            return Finding(name, False, (f"{oce.cls} and the {oce.kind} of {oce.prop} use different templates",))
        members = {t[0] for t in ctx.extension(cls)}
        pos = 0 if oce.kind == "domain" else 1
        needed = {t[pos] for t in ctx.extension(prop)}
        extra = needed - members
        if extra:
            return Finding(name, False, tuple(evidence) + (f"[{dset.label}] not every {oce.kind} value is a member",),
                           _fmt(_first({(x,) for x in extra})))
        evidence.append(f"[{dset.label}] {len(needed)} {oce.kind} values, all among {len(members)} members")
    return Finding(name, True, tuple(evidence))
