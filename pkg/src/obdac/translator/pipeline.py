"""The compiler: SPARQL query in, relational expression and SQL text out."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

from ..errors import ObdaError, StageError
from ..mapping.model import ConstrainedSpec, PredicateDef
from ..mapping.tmappings import (apply_exact_predicates, group_definitions, saturate_tmappings,
                                 split_multi_template)
from ..relalg.expr import count_joins, count_unions, format_expr, union_branches
from ..sparql.ast import BGP, Query, rewrite_predicates, walk_patterns
from ..sparql.parser import parse_query
from .cte import share_bodies
from .options import CompileOptions
from .semantic import semantic_optimize
from .sqlemit import emit_sql
from .structural import structural_optimize
from .tau import answer_expr, tau
from .unfold import Unfolder
from .vfd import VfdPlanner, cte_name, optimizing_body, vfd_optimize


@dataclass(frozen=True)
class Stage:
    """Operator counts after one stage.

    ``unions`` and ``joins`` treat mapping bodies as opaque relations, so they
    count the operators the translation itself introduces; ``all_joins``
    includes joins inside bodies too.
    """

    name: str
    unions: int
    joins: int
    branches: int
    all_joins: int
    expr: object


@dataclass
class Trace:
    stages: list[Stage] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    opaque: frozenset = frozenset()
    blocks: list[tuple[str, int]] = field(default_factory=list)

    def record(self, name: str, expr) -> None:
        self.stages.append(Stage(name, count_unions(expr, self.opaque), count_joins(expr, self.opaque),
                                 union_branches(expr), count_joins(expr), expr))

    def stage(self, name: str) -> Stage | None:
        return next((s for s in self.stages if s.name == name), None)

    def format(self, expressions: bool = True) -> str:
        lines = []
        for s in self.stages:
            lines.append(f"-- stage {s.name}: unions={s.unions} joins={s.joins} branches={s.branches}"
                         f" body_joins={s.all_joins - s.joins}")
            if expressions:
                lines.append(format_expr(s.expr, 1))
        lines.extend(f"-- block {b}: branches={n}" for b, n in self.blocks)
        lines.extend(f"-- note: {n}" for n in self.notes)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Definitions:
    defs: dict[str, PredicateDef]
    table: dict[str, tuple[str, ...]]


class Compiler:
    """Compiles queries against one constrained specification, caching T-mappings."""

    def __init__(self, cspec: ConstrainedSpec):
        self.cspec = cspec
        self.spec = cspec.spec
        self._defs: dict[bool, Definitions] = {}
        self._opaque: frozenset | None = None

    def opaque(self) -> frozenset:
        """Mapping bodies, which operator counts treat as single relations."""
        if self._opaque is None:
            bodies = {m.body for m in self.spec.mappings}
            for exact in (False, True):
                bodies |= {d.body() for d in self.definitions(exact).defs.values()}
            self._opaque = frozenset(bodies)
        return self._opaque

    def definitions(self, exact: bool) -> Definitions:
        hit = self._defs.get(exact)
        if hit is None:
            tmaps = saturate_tmappings(self.spec.ontology, self.spec.mappings)
            if exact:
                tmaps = apply_exact_predicates(tmaps, self.cspec.constraints.exact, self.spec.mappings)
            renamed, table = split_multi_template(tmaps)
            hit = self._defs[exact] = Definitions(group_definitions(renamed, table), table)
        return hit

    def assemble(self, query: Query, d: Definitions, block: Callable[[Unfolder, BGP], object]):
        pattern = rewrite_predicates(query.pattern, d.table)
        unfolder = Unfolder(d.defs, self.spec.schema)
        return answer_expr(query, tau(pattern, lambda bgp: block(unfolder, bgp)))

    def translate(self, query, options: CompileOptions | None = None):
        """Return ``(expr, sql, trace)`` for ``query`` (text or parsed)."""
        options = options or CompileOptions()
        trace = Trace(opaque=self.opaque())
        constraints = self.cspec.constraints
        schema = self.spec.schema

        def run(name, fn, *args):
            try:
                return fn(*args)
            except StageError:
                raise
            except (ObdaError, ValueError, KeyError, TypeError) as exc:
                raise StageError(name, exc) from exc

        if isinstance(query, str):
            query = run("parse", parse_query, query, "<query>", self.spec.prefixes)
        plain = lambda u, bgp: u.block(bgp)  # noqa: E731
        raw = run("tmappings", self.definitions, False)
        current = run("unfold", self.assemble, query, raw, plain)
        trace.record("unfold", current)
        d = raw
        if options.exact_predicates and constraints.exact:
            d = run("exact", self.definitions, True)
            current = run("exact", self.assemble, query, d, plain)
            trace.record("exact", current)
        if options.structural:
            current = run("structural", structural_optimize, current, schema, options.branch_budget,
                          trace.notes)
            trace.record("structural", current)
        if options.vfd and constraints.vfds:
            planner = VfdPlanner(d.defs, constraints)

            def block(u, bgp):
                return vfd_optimize(bgp, u, planner) or u.block(bgp)
            current = run("vfd", self.assemble, query, d, block)
            if options.structural:
                current = run("vfd", structural_optimize, current, schema, options.branch_budget, [])
            trace.notes.extend(planner.notes)
            trace.record("vfd", current)
        if options.semantic_keys:
            current = run("semantic", semantic_optimize, current, schema)
            trace.record("semantic", current)
        if options.cte_mode and constraints.vfds:
            planner = VfdPlanner(d.defs, constraints)
            bodies = {optimizing_body(v, d.defs): cte_name(v) for v in constraints.vfds
                      if planner.usable(v) is None}
            current = run("cte", share_bodies, current, bodies)
            trace.record("cte", current)
        sql = run("emit", emit_sql, current, options)
        if options.explain:
            trace.blocks = self.block_branches(query, options)
        return current, sql, trace

    def block_branches(self, query: Query, options: CompileOptions) -> list[tuple[str, int]]:
        """Union branch count of each basic graph pattern compiled on its own."""
        quiet = replace(options, explain=False)
        out = []
        for bgp in walk_patterns(query.pattern):
            if not isinstance(bgp, BGP) or not bgp.triples:
                continue
            expr, _, _ = self.translate(Query(bgp), quiet)
            out.append((" . ".join(str(t) for t in bgp.triples), union_branches(expr)))
        return out


def translate(query, cspec: ConstrainedSpec, options: CompileOptions | None = None):
    """Compile ``query`` over ``cspec``; returns ``(expr, sql, trace)``."""
    return Compiler(cspec).translate(query, options)
