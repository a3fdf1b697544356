"""Constraint-aware SPARQL-to-SQL compiler for ontology-based data access."""

__version__ = "0.1.0"
