"""Running a scenario's queries and reporting operator counts and timings."""

from __future__ import annotations

import os
import statistics
import time
from dataclasses import dataclass, field, replace

from ..errors import ObdaError
from ..relalg.evaluate import Evaluator
from ..relalg.expr import count_scans
from ..translator.pipeline import Compiler
from .wisconsin import Scenario, scenario

DEFAULT_SCALE = 100_000
DEFAULT_RUNS = 3
DEFAULT_BUDGET_MB = 2048
BUDGET_ENV = "OBDAC_BENCH_MEMORY_MB"

# Peak bytes per generated row, measured with tracemalloc, times headroom for
# the intermediate relations evaluation builds.
_BYTES_PER_ROW = {"K": 2300, "E": 2200}
_HEADROOM = 3


class BudgetError(ObdaError):
    """The requested scale would not fit the memory budget."""


def estimate_mb(name: str, scale: int) -> int:
    return -(-scale * _BYTES_PER_ROW[name[0]] * _HEADROOM // 2**20)


def memory_budget(override: int | None = None) -> int:
    if override is not None:
        return override
    return int(os.environ.get(BUDGET_ENV, DEFAULT_BUDGET_MB))


def check_budget(name: str, scale: int, budget_mb: int) -> None:
    need = estimate_mb(name, scale)
    if need > budget_mb:
        fits = budget_mb * 2**20 // (_BYTES_PER_ROW[name[0]] * _HEADROOM)
        raise BudgetError(
            f"scenario {name} at scale {scale} needs about {need} MB but the budget is {budget_mb} MB; "
            f"use --scale {fits} or less, or raise the budget with --memory-mb or {BUDGET_ENV}")


@dataclass
class QueryResult:
    query: str
    answers: int
    unions: int
    joins: int
    self_joins: int
    branches: int
    times: list[float] = field(default_factory=list)
    compile_time: float = 0.0

    @property
    def mean(self) -> float:
        return statistics.fmean(self.times)


@dataclass
class BenchReport:
    scenario: str
    scale: int
    seed: int
    results: list[QueryResult]

    def result(self, query: str) -> QueryResult:
        return next(r for r in self.results if r.query == query)

    def format(self, baseline: "BenchReport | None" = None) -> str:
        head = [f"# scenario {self.scenario}, scale {self.scale}, seed {self.seed}",
                "# timings are indicative: an in-memory Python evaluator, not a database engine"]
        if baseline is not None:
            head.append(f"# operator-count deltas against {baseline.scenario}")
            head.append(f"{'query':<18}{'d_joins':>8}{'d_self':>8}{'d_unions':>9}{'time_ratio':>11}")
            for r in self.results:
                b = baseline.result(r.query)
                ratio = r.mean / b.mean if b.mean else float("nan")
                head.append(f"{r.query:<18}{r.joins - b.joins:>8}{r.self_joins - b.self_joins:>8}"
                            f"{r.unions - b.unions:>9}{ratio:>11.2f}")
        head.append(f"{'query':<18}{'joins':>6}{'self':>6}{'unions':>7}{'blocks':>7}{'answers':>9}"
                    f"{'mean_s':>10}{'compile_s':>10}")
        for r in self.results:
            head.append(f"{r.query:<18}{r.joins:>6}{r.self_joins:>6}{r.unions:>7}{r.branches:>7}"
                        f"{r.answers:>9}{r.mean:>10.4f}{r.compile_time:>10.4f}")
        return "\n".join(head) + "\n"


def _self_joins(expr, relations) -> int:
    return sum(max(count_scans(expr, r) - 1, 0) for r in relations)


def run_scenario(sc: Scenario | str, scale: int = DEFAULT_SCALE, seed: int = 0, runs: int = DEFAULT_RUNS,
                 queries=None, budget_mb: int | None = None, instance=None) -> BenchReport:
    """Compile every query once, then evaluate it ``runs`` times on fresh evaluators.

    Evaluators do not share equal subtrees, so repeated scans of one view are
    all paid for, and a fresh one per run keeps results from carrying over.
    """
    if isinstance(sc, str):
        sc = scenario(sc, scale)
    if instance is None:
        check_budget(sc.name, scale, memory_budget(budget_mb))
        instance = sc.instance(scale, seed)
    compiler = Compiler(sc.cspec)
    options = replace(sc.options, explain=True)
    results = []
    for name, query in sc.queries.items():
        if queries is not None and name not in queries:
            continue
        start = time.perf_counter()
        expr, _, trace = compiler.translate(query, options)
        compile_time = time.perf_counter() - start
        final = trace.stages[-1]
        blocks = max((n for _, n in trace.blocks), default=final.branches)
        res = QueryResult(name, 0, final.unions, final.joins, _self_joins(expr, sc.relations), blocks,
                          compile_time=compile_time)
        for _ in range(runs):
            start = time.perf_counter()
            answer = Evaluator(instance, share=False)(expr)
            res.times.append(time.perf_counter() - start)
        res.answers = len(answer)
        results.append(res)
    return BenchReport(sc.name, scale, seed, results)
