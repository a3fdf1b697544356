"""Replacing stars and chains of functional properties by a single mapping body.

Given a certified optimizing VFD with anchor property ``P1`` (body
``sql_1``), a basic graph pattern whose property atoms around one subject
variable are a subset of the VFD's properties (branching form), or exactly its
chain (path form), is answered by reading ``sql_1`` once: the subject term is
built from ``P1``'s subject template and each object term from ``P_i``'s
object template, all over ``sql_1``'s columns. Type atoms covered by a
domain/range class expression ride along and disappear.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..mapping.model import Constraints, Oce, PredicateDef, Vfd
from ..relalg.expr import Project, Select, not_null, output_attrs
from ..sparql.ast import BGP, Triple, Var
from ..terms import IRI, RDF_TYPE
from .unfold import Unfolder, build_leaf, join_atoms, prefixed_core


@dataclass(frozen=True)
class Rewrite:
    vfd: Vfd
    triples: tuple[Triple, ...]        # property atoms replaced, in VFD order
    absorbed: tuple[Triple, ...]       # type atoms made redundant
    terms: tuple                       # subject var then one var per property

    def covers(self) -> set[Triple]:
        return set(self.triples) | set(self.absorbed)


def cte_name(vfd: Vfd) -> str:
    parts = [re.sub(r"\W+", "_", p.rsplit(":", 1)[-1]).strip("_").lower() for p in vfd.properties]
    return "vfd_" + "_".join(parts)


def optimizing_body(vfd: Vfd, defs: dict[str, PredicateDef]):
    """``sql_1`` restricted to the attributes the rewrite reads, all non-null."""
    first = defs[vfd.properties[0]]
    attrs = _read_attrs(vfd, defs)
    return Project(attrs, Select(not_null(*attrs), first.body()))


def _read_attrs(vfd: Vfd, defs) -> tuple[str, ...]:
    first = defs[vfd.properties[0]]
    out = list(first.head()[0].attrs)
    for p in vfd.properties:
        out.extend(a for a in defs[p].head()[1].attrs if a not in out)
    return tuple(out)


def _is_property_atom(t: Triple) -> bool:
    return not (isinstance(t.p, IRI) and t.p == RDF_TYPE)


def _type_atom(t: Triple) -> bool:
    return isinstance(t.p, IRI) and t.p == RDF_TYPE and isinstance(t.o, IRI)


class VfdPlanner:
    """Finds the VFD rewrites applicable to one basic graph pattern."""

    def __init__(self, defs: dict[str, PredicateDef], constraints: Constraints, split: set[str] = frozenset()):
        self.defs = defs
        self.constraints = constraints
        self.split = set(split)
        self.notes: list[str] = []

    def usable(self, vfd: Vfd) -> str | None:
        """Reason why ``vfd`` can never be applied here, or None."""
        for p in vfd.properties:
            d = self.defs.get(p)
            if d is None or d.is_class:
                return f"{p} has no basic definition"
        first = self.defs[vfd.properties[0]]
        if vfd.kind == "branching":
            for p in vfd.properties:
                if self.defs[p].subject.shape != vfd.template.shape:
                    return f"{p} does not use the template {vfd.template.skeleton()}"
        else:
            if first.subject.shape != vfd.template.shape:
                return f"{vfd.properties[0]} does not use the template {vfd.template.skeleton()}"
            for a, b in zip(vfd.properties, vfd.properties[1:]):
                if self.defs[a].obj.shape != self.defs[b].subject.shape:
                    return f"range of {a} does not match the domain of {b}"
        outputs = set(output_attrs(first.body()))
        missing = [a for a in _read_attrs(vfd, self.defs) if a not in outputs]
        if missing:
            return f"the body of {vfd.properties[0]} does not expose {', '.join(missing)}"
        return None

    def _covered(self, t: Triple, var: Var, props: list[tuple[str, str]]) -> bool:
        """Whether type atom ``t`` on ``var`` is implied by some (kind, property) in ``props``."""
        if t.s != var or not _type_atom(t) or str(t.o) in self.split:
            return False
        cls = self.defs.get(str(t.o))
        if cls is None or not cls.is_class:
            return False
        for kind, p in props:
            if Oce(kind, p, str(t.o)) in self.constraints.oces:
                tpl = self.defs[p].subject if kind == "domain" else self.defs[p].obj
                if cls.subject.shape == tpl.shape:
                    return True
        return False

    def _absorb(self, bgp: BGP, positions: list[tuple[Var, list[tuple[str, str]]]]) -> tuple[Triple, ...]:
        out = []
        for t in bgp.triples:
            if any(self._covered(t, v, props) for v, props in positions):
                out.append(t)
        return tuple(out)

    def branching(self, vfd: Vfd, bgp: BGP) -> list[Rewrite]:
        out = []
        subjects = dict.fromkeys(t.s for t in bgp.triples if isinstance(t.s, Var) and _is_property_atom(t))
        for v in subjects:
            star = [t for t in bgp.triples if t.s == v and _is_property_atom(t)]
            preds = [t.p for t in star]
            if not all(isinstance(p, IRI) for p in preds) or len(set(preds)) != len(preds):
                continue
            names = [str(p) for p in preds]
            if any(n in self.split for n in names) or not set(names) <= set(vfd.properties):
                continue
            if vfd.properties[0] not in names:
                continue
            objs = [t.o for t in star]
            if not all(isinstance(o, Var) and o != v for o in objs) or len(set(objs)) != len(objs):
                continue
            order = sorted(star, key=lambda t: vfd.properties.index(str(t.p)))
            positions = [(v, [("domain", str(t.p)) for t in order])]
            positions += [(t.o, [("range", str(t.p))]) for t in order]
            absorbed = self._absorb(bgp, positions)
            if len(order) == 1 and not absorbed:
                continue
            out.append(Rewrite(vfd, tuple(order), absorbed, (v,) + tuple(t.o for t in order)))
        return out

    def path(self, vfd: Vfd, bgp: BGP) -> list[Rewrite]:
        props = [t for t in bgp.triples if _is_property_atom(t)]
        if len(props) != len(vfd.properties):
            return []
        start = [t for t in props if isinstance(t.p, IRI) and str(t.p) == vfd.properties[0]]
        if len(start) != 1:
            return []
        chain, current = [start[0]], start[0]
        for name in vfd.properties[1:]:
            nxt = [t for t in props if isinstance(t.p, IRI) and str(t.p) == name and t.s == current.o]
            if len(nxt) != 1:
                return []
            chain.append(nxt[0])
            current = nxt[0]
        if set(chain) != set(props) or any(str(t.p) in self.split for t in chain):
            return []
        terms = (chain[0].s,) + tuple(t.o for t in chain)
        if not all(isinstance(x, Var) for x in terms) or len(set(terms)) != len(terms):
            return []
        positions = [(chain[0].s, [("domain", vfd.properties[0])])]
        for i, t in enumerate(chain):
            around = [("range", str(t.p))]
            if i + 1 < len(chain):
                around.append(("domain", str(chain[i + 1].p)))
            positions.append((t.o, around))
        absorbed = self._absorb(bgp, positions)
        return [Rewrite(vfd, tuple(chain), absorbed, terms)]

    def plan(self, bgp: BGP) -> list[Rewrite]:
        """Disjoint rewrites, longest property list first, then declaration order."""
        candidates = []
        for order, vfd in enumerate(self.constraints.vfds):
            reason = self.usable(vfd)
            if reason is not None:
                note = f"{vfd}: not applicable ({reason})"
                if note not in self.notes:
                    self.notes.append(note)
                continue
            found = self.branching(vfd, bgp) if vfd.kind == "branching" else self.path(vfd, bgp)
            candidates.extend((-len(r.triples), order, r) for r in found)
        chosen, used = [], set()
        for _, _, r in sorted(candidates, key=lambda c: (c[0], c[1])):
            if r.covers() & used:
                continue
            chosen.append(r)
            used |= r.covers()
        return chosen


def virtual_atom(rewrite: Rewrite, defs: dict[str, PredicateDef], prefix: str):
    """Leaf reading the optimizing body once for the whole star or chain."""
    vfd = rewrite.vfd
    first = defs[vfd.properties[0]]
    body = optimizing_body(vfd, defs)
    attrs = output_attrs(body)
    core = prefixed_core(body, attrs, prefix)
    templates = (first.head()[0],) + tuple(defs[str(t.p)].head()[1] for t in rewrite.triples)
    return build_leaf(rewrite.terms, templates, core, prefix)


def vfd_optimize(bgp: BGP, unfolder: Unfolder, planner: VfdPlanner):
    """Unfolded block of ``bgp`` with every planned rewrite applied, or None if none applies."""
    rewrites = planner.plan(bgp)
    if not rewrites:
        return None
    covered = set().union(*(r.covers() for r in rewrites))
    atoms = []
    for r in rewrites:
        atoms.append(virtual_atom(r, unfolder.defs, f"v{unfolder.fresh()}"))
    atoms.extend(unfolder.atom(t) for t in bgp.triples if t not in covered)
    return join_atoms(atoms)
