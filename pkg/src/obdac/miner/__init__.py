"""Constraint discovery and validation over concrete instances."""

from .checks import Context, Finding, check_exact, check_oce, check_vfd, lemma_violation
from .mine import (DEFAULT_MAX_PATH, MiningReport, check_lemma, mine, mine_branching_vfds,
                   mine_exact_predicates, mine_oces, mine_path_vfds, validate_constraints)

__all__ = [
    "Context", "Finding", "check_exact", "check_oce", "check_vfd", "lemma_violation",
    "DEFAULT_MAX_PATH", "MiningReport", "check_lemma", "mine", "mine_branching_vfds",
    "mine_exact_predicates", "mine_oces", "mine_path_vfds", "validate_constraints",
]
