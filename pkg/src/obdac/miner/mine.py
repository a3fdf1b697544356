"""Discovering constraints that a concrete instance satisfies."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..mapping.model import ConstrainedSpec, Constraints, ObdaSpec, Oce, Vfd
from .checks import Context, Finding, check_exact, check_oce, check_vfd, lemma_violation

DEFAULT_MAX_PATH = 4


@dataclass
class MiningReport:
    """Certified constraints with the evidence gathered for every candidate."""

    fingerprint: str
    row_counts: dict[str, int]
    exact: tuple[str, ...] = ()
    vfds: tuple[Vfd, ...] = ()
    oces: tuple[Oce, ...] = ()
    findings: list[Finding] = field(default_factory=list)

    def constraints(self) -> Constraints:
        return Constraints(self.exact, self.vfds, self.oces)

    @property
    def rejected(self) -> list[Finding]:
        return [f for f in self.findings if not f.certified]

    def constraint_text(self) -> str:
        """Loadable constraint file; every entry holds on the mined instance only."""
        head = [f"# instance-certified on {self.fingerprint}; review against domain knowledge before adopting"]
        return "\n".join(head) + "\n" + self.constraints().format()

    def format(self) -> str:
        lines = [f"instance {self.fingerprint}: "
                 + ", ".join(f"{r}={n}" for r, n in self.row_counts.items())]
        for f in self.findings:
            mark = "certified" if f.certified else "rejected "
            lines.append(f"{mark} {f.constraint}")
            lines.extend(f"    {e}" for e in f.evidence)
            if f.witness:
                lines.append(f"    witness: {f.witness}")
        lines.append(f"{len(self.findings) - len(self.rejected)} certified, {len(self.rejected)} rejected")
        return "\n".join(lines) + "\n"


def _report(inst, findings: list[Finding], exact, vfds, oces) -> MiningReport:
    return MiningReport(inst.fingerprint(), inst.row_counts(), tuple(exact), tuple(vfds), tuple(oces), findings)


# ---------------------------------------------------------------------------
# candidate generation

def _exact_candidates(spec: ObdaSpec) -> list[str]:
    return sorted({m.predicate for m in spec.mappings})


def _basic(ctx: Context, is_class: bool) -> list:
    """Saturated definitions of unsplit predicates, by name."""
    return [d for _, d in sorted(ctx.saturated.defs.items()) if d.name == d.original and d.is_class == is_class]


def _properties_by_subject(ctx: Context) -> dict:
    groups: dict = {}
    for d in _basic(ctx, False):
        if d.subject.kind == "iri":
            groups.setdefault(d.subject.shape, []).append(d)
    return groups


def _branching(ctx: Context, exhaustive: bool) -> tuple[list[Vfd], list[Finding]]:
    found, findings = [], []
    for group in _properties_by_subject(ctx).values():
        tpl = group[0].subject
        functional = []
        for d in group:
            f = check_vfd(ctx, Vfd.over("branching", tpl, (d.name,)))
            if f.certified:
                functional.append(d.name)
            elif f.witness:
                findings.append(f)
        for anchor in functional:
            partners = [p for p in functional if p != anchor
                        and check_vfd(ctx, Vfd.over("branching", tpl, (anchor, p))).certified]
            if exhaustive:
                subsets = [c for k in range(len(partners), -1, -1) for c in itertools.combinations(partners, k)]
            else:
                subsets = [tuple(partners)]
            for subset in subsets:
                vfd = Vfd.over("branching", tpl, (anchor,) + subset)
                f = check_vfd(ctx, vfd)
                findings.append(f)
                if f.certified:
                    found.append(vfd)
    return found, findings


def _chains(ctx: Context, max_length: int) -> list[tuple[str, ...]]:
    props = _basic(ctx, False)
    out = []

    def extend(chain):
        if len(chain) >= 2:
            out.append(tuple(d.name for d in chain))
        if len(chain) == max_length:
            return
        last = chain[-1]
        for d in props:
            if d not in chain and last.obj.kind == "iri" and d.subject.shape == last.obj.shape:
                extend(chain + [d])

    for d in props:
        if d.subject.kind == "iri":
            extend([d])
    return out


def _path(ctx: Context, max_length: int) -> tuple[list[Vfd], list[Finding]]:
    found, findings = [], []
    for chain in _chains(ctx, max_length):
        vfd = Vfd.over("path", ctx.saturated.defs[chain[0]].subject, chain)
        f = check_vfd(ctx, vfd)
        findings.append(f)
        if f.certified:
            found.append(vfd)
    return found, findings


def _oces(ctx: Context) -> tuple[list[Oce], list[Finding]]:
    found, findings = [], []
    classes, props = _basic(ctx, True), _basic(ctx, False)
    for p in props:
        for kind, tpl in (("domain", p.subject), ("range", p.obj)):
            for c in classes:
                if c.subject.shape != tpl.shape:
                    continue
                oce = Oce(kind, p.name, c.name)
                f = check_oce(ctx, oce)
                findings.append(f)
                if f.certified:
                    found.append(oce)
    return found, findings


# ---------------------------------------------------------------------------
# public operations

def mine_exact_predicates(spec: ObdaSpec, inst) -> set[str]:
    ctx = Context(spec, inst)
    return {p for p in _exact_candidates(spec) if check_exact(ctx, p).certified}


def mine_branching_vfds(spec: ObdaSpec, inst, exact=(), exhaustive: bool = False) -> set[Vfd]:
    return set(_branching(Context(spec, inst, exact), exhaustive)[0])


def mine_path_vfds(spec: ObdaSpec, inst, exact=(), max_length: int = DEFAULT_MAX_PATH) -> set[Vfd]:
    return set(_path(Context(spec, inst, exact), max_length)[0])


def mine_oces(spec: ObdaSpec, inst, exact=()) -> set[Oce]:
    return set(_oces(Context(spec, inst, exact))[0])


def mine(spec: ObdaSpec, inst, max_length: int = DEFAULT_MAX_PATH, exhaustive: bool = False) -> MiningReport:
    """Every constraint kind, checked against the definitions the compiler will read."""
    base = Context(spec, inst)
    findings = [check_exact(base, p) for p in _exact_candidates(spec)]
    exact = [f.constraint.split(" ", 1)[1] for f in findings if f.certified]
    ctx = base.with_exact(exact)
    branching, f1 = _branching(ctx, exhaustive)
    paths, f2 = _path(ctx, max_length)
    oces, f3 = _oces(ctx)
    return _report(inst, findings + f1 + f2 + f3, exact, branching + paths, oces)


def validate_constraints(cspec: ConstrainedSpec, inst) -> MiningReport:
    """Re-check every declared constraint; only the ones that hold are certified."""
    c = cspec.constraints
    base = Context(cspec.spec, inst)
    findings = [check_exact(base, p) for p in c.exact]
    exact = [p for p, f in zip(c.exact, findings) if f.certified]
    ctx = base.with_exact(exact)
    vfds, oces = [], []
    for v in c.vfds:
        f = check_vfd(ctx, v)
        findings.append(f)
        if f.certified:
            vfds.append(v)
    for o in c.oces:
        f = check_oce(ctx, o)
        findings.append(f)
        if f.certified:
            oces.append(o)
    return _report(inst, findings, exact, vfds, oces)


def check_lemma(spec: ObdaSpec, inst, vfd: Vfd, exact=()) -> str | None:
    """None if the anchor body alone reproduces the join of the VFD's properties."""
    return lemma_violation(Context(spec, inst, exact), vfd)


__all__ = ["MiningReport", "mine", "mine_exact_predicates", "mine_branching_vfds", "mine_path_vfds",
           "mine_oces", "validate_constraints", "check_lemma"]
