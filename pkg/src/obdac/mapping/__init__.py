"""Mappings, T-mappings and the constraint component of a specification."""

from .model import ConstrainedSpec, Constraints, Mapping, ObdaSpec, Oce, PredicateDef, Vfd, empty_spec
from .parse import load_constraints, load_mappings, load_spec, parse_constraints, parse_mappings
from .sqlparse import build_body, parse_sql
from .tmappings import (apply_exact_predicates, group_definitions, saturate_tmappings,
                        split_multi_template, virtual_assertions)

__all__ = [
    "ConstrainedSpec", "Constraints", "Mapping", "ObdaSpec", "Oce", "PredicateDef", "Vfd", "empty_spec",
    "load_constraints", "load_mappings", "load_spec", "parse_constraints", "parse_mappings",
    "build_body", "parse_sql",
    "apply_exact_predicates", "group_definitions", "saturate_tmappings", "split_multi_template",
    "virtual_assertions",
]
