"""Command-line interface: translate, explain, mine, verify and bench."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .bench import SCENARIOS, BudgetError, run_scenario, scenario
from .bench.runner import BUDGET_ENV, DEFAULT_RUNS, DEFAULT_SCALE, check_budget, memory_budget
from .errors import ObdaError
from .mapping.model import ConstrainedSpec, Constraints
from .mapping.parse import load_constraints, load_spec
from .miner import DEFAULT_MAX_PATH, check_lemma, mine, validate_constraints
from .relalg.evaluate import Evaluator
from .relalg.schema import load_instance, write_instance
from .sparql.evaluate import oracle_answer, to_relation
from .sparql.parser import load_query, parse_query
from .terms import format_term, row_key
from .translator import CompileOptions, Compiler, all_option_combinations

OK, VERIFY_FAILED, INPUT_ERROR = 0, 1, 2
DIFF_LIMIT = 5


class InputError(Exception):
    """Missing or unusable command-line input."""


@dataclass
class Layout:
    schema: Path
    ontology: Path | None
    mappings: Path
    constraints: Path | None
    data: Path | None
    queries: list[Path]


def _existing(path: Path | None) -> Path | None:
    return path if path is not None and path.exists() else None


def layout_from(args) -> Layout:
    """Explicit flags win; ``--project DIR`` supplies the conventional file names."""
    root = Path(args.project) if args.project else None

    def pick(flag, default):
        if flag:
            p = Path(flag)
            if not p.exists():
                raise InputError(f"no such file or directory: {p}")
            return p
        return _existing(root / default) if root else None

    schema, mappings = pick(args.schema, "schema.txt"), pick(args.mappings, "mappings.txt")
    if schema is None or mappings is None:
        raise InputError("a schema and a mapping file are required (--schema, --mappings or --project)")
    queries = list(args.query or [])
    if not queries and root and (root / "queries").is_dir():
        queries = [str(root / "queries")]
    return Layout(schema, pick(args.ontology, "ontology.ttl"), mappings, pick(args.constraints, "constraints.txt"),
                  pick(args.data, "data"), [Path(q) if Path(q).exists() else q for q in queries])


def load_cspec(layout: Layout) -> ConstrainedSpec:
    spec = load_spec(layout.schema, layout.ontology, layout.mappings)
    constraints = load_constraints(layout.constraints, spec.prefixes) if layout.constraints else Constraints()
    return ConstrainedSpec(spec, constraints)


def load_queries(layout: Layout, prefixes) -> list[tuple[str, object]]:
    out = []
    for q in layout.queries:
        if isinstance(q, Path):
            files = sorted(q.glob("*.rq")) if q.is_dir() else [q]
            out += [(f.stem, load_query(f, prefixes)) for f in files]
        elif q.lstrip().upper().startswith(("SELECT", "PREFIX")):
            out.append((f"inline{len(out) + 1}", parse_query(q, "<--query>", prefixes)))
        else:
            raise InputError(f"--query {q!r} is neither a file, a directory nor query text")
    return out


def options_from(args, explain: bool = False) -> CompileOptions:
    if args.no_opt:
        base = CompileOptions.none()
    else:
        base = CompileOptions(structural=not args.no_structural, semantic_keys=not args.no_semantic,
                              exact_predicates=not args.no_exact, vfd=not args.no_vfd)
    if args.cte and not base.vfd:
        raise InputError("--cte needs the VFD rewrite; drop --no-vfd")
    return replace(base, cte_mode=args.cte, explain=explain)


def allowed_combinations(args) -> list[CompileOptions]:
    """Every toggle combination the flags do not switch off."""
    limit = options_from(args)
    keep = []
    for o in all_option_combinations():
        if (o.structural and not limit.structural or o.semantic_keys and not limit.semantic_keys
                or o.exact_predicates and not limit.exact_predicates or o.vfd and not limit.vfd):
            continue
        keep.append(o)
    return keep


# ---------------------------------------------------------------------------
# commands

def cmd_translate(args, out) -> int:
    layout = layout_from(args)
    cspec = load_cspec(layout)
    queries = load_queries(layout, cspec.spec.prefixes)
    if not queries:
        raise InputError("no query given (--query FILE|DIR|TEXT)")
    compiler = Compiler(cspec)
    options = options_from(args, explain=args.explain)
    for name, query in queries:
        _, sql, trace = compiler.translate(query, options)
        if len(queries) > 1:
            out.write(f"-- query {name}\n")
        out.write(sql)
        if args.explain:
            out.write(trace.format(expressions=False))
    return OK


def cmd_explain(args, out) -> int:
    layout = layout_from(args)
    cspec = load_cspec(layout)
    compiler = Compiler(cspec)
    options = options_from(args, explain=True)
    for name, query in load_queries(layout, cspec.spec.prefixes):
        _, sql, trace = compiler.translate(query, options)
        out.write(f"== query {name} [{options.label()}]\n")
        out.write(trace.format())
        out.write(sql)
    return OK


def _instance(layout: Layout, cspec):
    if layout.data is None:
        raise InputError("this command needs relation CSVs (--data DIR)")
    return load_instance(cspec.spec.schema, layout.data)


def cmd_mine(args, out) -> int:
    layout = layout_from(args)
    cspec = load_cspec(layout)
    inst = _instance(layout, cspec)
    report = mine(cspec.spec, inst, max_length=args.max_path, exhaustive=args.exhaustive)
    if args.out:
        Path(args.out).write_text(report.constraint_text(), encoding="utf-8")
        out.write(report.format())
        out.write(f"constraints written to {args.out}\n")
    else:
        out.write(report.format())
        out.write(report.constraint_text())
    return OK


def _diff(got, want) -> list[str]:
    lines = []
    for label, rows in (("missing", want.rows - got.rows), ("extra", got.rows - want.rows)):
        ordered = sorted(rows, key=row_key)
        for r in ordered[:DIFF_LIMIT]:
            lines.append(f"    {label}: (" + ", ".join(format_term(v) if v is not None else "UNBOUND"
                                                        for v in r) + ")")
        if len(ordered) > DIFF_LIMIT:
            lines.append(f"    ... {len(ordered) - DIFF_LIMIT} more {label}")
    return lines


def trusted_constraints(cspec: ConstrainedSpec, inst, out) -> tuple[ConstrainedSpec, bool]:
    """Keep the declared constraints that hold on ``inst``; report the others."""
    report = validate_constraints(cspec, inst)
    refused = False
    for f in report.rejected:
        refused = True
        out.write(f"refused {f.constraint}: not certified on this instance\n")
        out.writelines(f"    {e}\n" for e in f.evidence)
        if f.witness:
            out.write(f"    witness: {f.witness}\n")
    vfds = []
    for v in report.vfds:
        problem = check_lemma(cspec.spec, inst, v, report.exact)
        if problem:
            refused = True
            out.write(f"refused {v}: anchor body does not reproduce the property join\n    witness: {problem}\n")
        else:
            vfds.append(v)
    kept = Constraints(report.exact, tuple(vfds), report.oces)
    return ConstrainedSpec(cspec.spec, kept), refused


def cmd_verify(args, out) -> int:
    layout = layout_from(args)
    cspec = load_cspec(layout)
    inst = _instance(layout, cspec)
    queries = load_queries(layout, cspec.spec.prefixes)
    trusted, refused = trusted_constraints(cspec, inst, out)
    compiler = Compiler(trusted)
    combos = allowed_combinations(args)
    failures = 0
    out.write(f"{'query':<24}{'options':<58}result\n")
    for name, query in queries:
        want = to_relation(oracle_answer(query, cspec.spec, inst), query.answer_vars)
        for options in combos:
            try:
                expr, _, _ = compiler.translate(query, options)
                got = Evaluator(inst)(expr)
            except ObdaError as exc:
                failures += 1
                out.write(f"{name:<24}{options.label():<58}ERROR {exc}\n")
                continue
            if got.same_as(want):
                out.write(f"{name:<24}{options.label():<58}pass ({len(want)} answers)\n")
            else:
                failures += 1
                out.write(f"{name:<24}{options.label():<58}FAIL\n")
                out.writelines(line + "\n" for line in _diff(got.reorder(want.attrs), want))
    out.write(f"{len(queries) * len(combos) - failures} passed, {failures} failed")
    out.write(", some declared constraints refused\n" if refused else "\n")
    return VERIFY_FAILED if failures or refused else OK


def cmd_bench(args, out) -> int:
    names = SCENARIOS if args.scenario == "all" else [args.scenario]
    budget = memory_budget(args.memory_mb)
    for name in names:
        check_budget(name, args.scale, budget)
    reports = {}
    for name in names:
        sc = scenario(name, args.scale)
        inst = sc.instance(args.scale, args.seed)
        if args.write:
            target = Path(args.write) / name
            target.mkdir(parents=True, exist_ok=True)
            for fname, text in sc.texts.items():
                (target / fname).write_text(text, encoding="utf-8")
            write_instance(inst, target / "data")
        reports[name] = run_scenario(sc, args.scale, args.seed, args.runs, instance=inst)
        del inst
    baselines = {"K2": "K3", "K1": "K3", "E1": "E0", "E2": "E0", "E3": "E0"}
    for name, report in reports.items():
        out.write(report.format(reports.get(baselines.get(name))))
        out.write("\n")
    return OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="obdac", description="Constraint-aware SPARQL-to-SQL compiler for OBDA.")
    sub = parser.add_subparsers(dest="command", required=True)

    def project_flags(p):
        p.add_argument("--project", help="directory with schema.txt, ontology.ttl, mappings.txt, "
                                         "constraints.txt, data/ and queries/")
        p.add_argument("--schema")
        p.add_argument("--ontology")
        p.add_argument("--mappings")
        p.add_argument("--constraints")
        p.add_argument("--data", help="directory with one CSV per relation")
        p.add_argument("--query", action="append", help="query file, directory of .rq files, or query text")
        p.add_argument("--no-structural", action="store_true")
        p.add_argument("--no-semantic", action="store_true")
        p.add_argument("--no-exact", action="store_true")
        p.add_argument("--no-vfd", action="store_true")
        p.add_argument("--no-opt", action="store_true", help="every optimization off")
        p.add_argument("--cte", action="store_true", help="share optimizing bodies through WITH")

    p = sub.add_parser("translate", help="print the SQL for each query")
    project_flags(p)
    p.add_argument("--explain", action="store_true", help="also print per-stage operator counts")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("explain", help="print every compilation stage")
    project_flags(p)
    p.add_argument("--explain", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("mine", help="certify constraints on the data")
    project_flags(p)
    p.add_argument("--out", help="write the constraint file here")
    p.add_argument("--max-path", type=int, default=DEFAULT_MAX_PATH)
    p.add_argument("--exhaustive", action="store_true", help="try every subset of branching partners")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("verify", help="compare compiled answers with the oracle under every option combination")
    project_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run a Wisconsin scenario")
    p.add_argument("--scenario", default="all", choices=list(SCENARIOS) + ["all"])
    p.add_argument("--scale", type=int, default=DEFAULT_SCALE)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=DEFAULT_RUNS)
    p.add_argument("--memory-mb", type=int, help=f"memory budget (default {BUDGET_ENV} or 2048)")
    p.add_argument("--write", help="also write each scenario's files and data under this directory")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    if getattr(args, "scale", 1) < 1 or getattr(args, "runs", 1) < 1:
        print("obdac: --scale and --runs must be positive", file=sys.stderr)
        return INPUT_ERROR
    try:
        return args.func(args, out)
    except BudgetError as exc:
        print(f"obdac: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except (InputError, ObdaError, OSError, ValueError) as exc:
        print(f"obdac: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
