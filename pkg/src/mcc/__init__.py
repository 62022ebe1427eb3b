"""Metamodel-driven concrete syntax: models, constraint mappings, grammars and parsing."""

from .asm import Model, parse_model, render_model, validate_model
from .constraints import CanonicalConstraintSet, canonicalize, check_consistency, equivalent, lower, merge
from .csm import Grammar, derive_grammar, export_grammar
from .dsl import MappingDocument, parse_mapping, render_mapping
from .pipeline import compile_language, parse_text

__version__ = "0.1.0"

__all__ = [
    "CanonicalConstraintSet", "Grammar", "MappingDocument", "Model", "canonicalize", "check_consistency",
    "compile_language", "derive_grammar", "equivalent", "export_grammar", "lower", "merge", "parse_mapping",
    "parse_model", "parse_text", "render_mapping", "render_model", "validate_model",
]
