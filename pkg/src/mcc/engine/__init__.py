"""Parsing engine: lexer, Earley recognizer, forests, disambiguation, instances."""

from .disambiguate import Selection, Tree, disambiguate, select
from .forest import Derivation, ParseForest, ParseResult, Parser, parse
from .instances import (Edge, Instance, InstanceGraph, NodeRef, RefValue, build_instances,
                        graph_to_dict, graph_to_json, resolve_references, unparse)
from .lexer import Token, lex
from .recognizer import BACKEND

__all__ = [
    "BACKEND", "Derivation", "Edge", "Instance", "InstanceGraph", "NodeRef", "ParseForest",
    "ParseResult", "Parser", "RefValue", "Selection", "Token", "Tree", "build_instances", "disambiguate", "graph_to_dict",
    "graph_to_json", "lex", "parse", "resolve_references", "select", "unparse",
]
