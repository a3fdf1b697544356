"""Wisconsin benchmark scenarios and their runner."""

from .runner import (BudgetError, BenchReport, QueryResult, check_budget, estimate_mb,
                     memory_budget, run_scenario)
from .wisconsin import SCENARIOS, Scenario, generate, scenario, schema_text

__all__ = ["BudgetError", "BenchReport", "QueryResult", "check_budget", "estimate_mb", "memory_budget",
           "run_scenario", "SCENARIOS", "Scenario", "generate", "scenario", "schema_text"]
