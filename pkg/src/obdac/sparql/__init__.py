"""SPARQL fragment: syntax, reference semantics and the OBDA oracle."""

from .ast import (BGP, AndE, Bind, Bound, Cmp, Filter, Join, NotE, Opt, OrE, Query, Triple, Union, Var,
                  certain_vars, format_pattern, operator_count, pattern_vars, rewrite_predicates)
from .evaluate import (answer, format_solutions, obda_graph, oracle_answer, project, query_answer,
                       to_relation, truth)
from .parser import load_query, parse_query

__all__ = [
    "BGP", "AndE", "Bind", "Bound", "Cmp", "Filter", "Join", "NotE", "Opt", "OrE", "Query", "Triple",
    "Union", "Var", "certain_vars", "format_pattern", "operator_count", "pattern_vars",
    "rewrite_predicates", "answer", "format_solutions", "obda_graph", "oracle_answer", "project",
    "query_answer", "to_relation", "truth", "load_query", "parse_query",
]
