"""SPARQL-to-SQL compilation over OBDA specifications."""

from .options import CompileOptions, all_option_combinations
from .pipeline import Compiler, Stage, Trace, translate
from .semantic import semantic_optimize
from .sqlemit import emit_sql
from .structural import structural_optimize
from .tau import Part, tau, triple_instance, triple_translation
from .unfold import Unfolder, as_leaf
from .vfd import VfdPlanner, optimizing_body, vfd_optimize

__all__ = [
    "CompileOptions", "Compiler", "Part", "Stage", "Trace", "Unfolder", "VfdPlanner", "all_option_combinations",
    "as_leaf", "emit_sql", "optimizing_body", "semantic_optimize", "structural_optimize", "tau",
    "translate", "triple_instance", "triple_translation", "vfd_optimize",
]
