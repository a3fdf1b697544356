"""In-memory relational algebra: schemas, instances, expressions, evaluation."""

from .checks import check_containment, check_fd, containment_witness, fd_violation
from .evaluate import Evaluator, Relation, compile_filter, evaluate, join, relation
from .expr import (TRUE, And, Attr, BaseRelation, Compare, Const, CteRef, Difference, Empty,
                   EquiJoin, IsNull, NaturalJoin, Not, Or, Padding, Project, Rename, Select,
                   Union, UriConstruct, WithCte, conj, count_joins, count_scans, count_unions,
                   eq, filter_attrs, format_expr, format_filter, infer_types, not_null, output_attrs,
                   rename_filter, union_branches, walk)
from .schema import (InclusionDep, Instance, Schema, format_schema, load_instance, load_schema,
                     parse_schema, write_instance)

__all__ = [
    "And", "Attr", "BaseRelation", "Compare", "Const", "CteRef", "Difference", "Empty",
    "EquiJoin", "Evaluator", "InclusionDep", "Instance", "IsNull", "NaturalJoin", "Not", "Or",
    "Padding", "Project", "Relation", "Rename", "Schema", "Select", "TRUE", "Union",
    "UriConstruct", "WithCte", "check_containment", "check_fd", "compile_filter", "conj",
    "containment_witness", "count_joins", "count_scans", "count_unions", "eq", "evaluate",
    "fd_violation", "filter_attrs", "format_expr", "format_filter", "format_schema", "infer_types", "join",
    "load_instance", "load_schema", "not_null", "output_attrs", "parse_schema", "relation",
    "rename_filter", "union_branches", "walk", "write_instance",
]
