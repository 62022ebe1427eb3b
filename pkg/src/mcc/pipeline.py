"""End-to-end helpers: files to model, constraints, grammar and instances."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .asm import Model, ModelSyntaxError, parse_model, validate_model
from .constraints import (CanonicalConstraintSet, check_consistency, defaults_from_model, lower, merge)
from .csm import Grammar, derive_grammar
from .diagnostics import Diagnostic, Span, error, has_errors
from .dsl import MappingDocument, parse_mapping
from .engine import Parser, build_instances, resolve_references, select
from .engine.disambiguate import Tree
from .engine.instances import InstanceGraph


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("mcc") / "fixtures" / name))


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")


def load_model_text(text: str, source: str = "") -> tuple[Model | None, list[Diagnostic]]:
    try:
        model = parse_model(text, source)
    except ModelSyntaxError as exc:
        span = Span(exc.line, exc.column, exc.line, exc.column + 1, source)
        return None, [error("model-syntax", str(exc.args[0]), span)]
    return model, validate_model(model)


def load_model(path) -> tuple[Model | None, list[Diagnostic]]:
    path = Path(path)
    return load_model_text(path.read_text(encoding="utf-8"), str(path))


def load_mapping(path, strict: bool = False) -> tuple[MappingDocument, list[Diagnostic]]:
    path = Path(path)
    return parse_mapping(path.read_text(encoding="utf-8"), str(path), strict=strict)


@dataclass
class Language:
    model: Model
    constraints: CanonicalConstraintSet
    grammar: Grammar | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not has_errors(self.diagnostics)


def constraint_set(model: Model, documents) -> tuple[CanonicalConstraintSet, list[Diagnostic]]:
    """Model defaults overlaid with every mapping document, in order."""
    diags: list[Diagnostic] = []
    layers = []
    for doc in documents:
        cset, d = lower(doc, model)
        layers.append(cset)
        diags.extend(d)
    merged, d = merge(defaults_from_model(model), layers)
    diags.extend(d)
    diags.extend(check_consistency(merged, model))
    return merged, diags


def compile_language(model: Model, documents=(), start: str | None = None) -> Language:
    cset, diags = constraint_set(model, documents)
    grammar = None
    if not has_errors(diags):
        grammar, d = derive_grammar(model, cset, start)
        diags.extend(d)
    return Language(model, cset, grammar, diags)


@dataclass
class ParseOutcome:
    tree: Tree | None
    graph: InstanceGraph | None
    diagnostics: list[Diagnostic]
    trees: int = 0          # size of the forest before disambiguation

    @property
    def ok(self) -> bool:
        return self.graph is not None and not has_errors(self.diagnostics)


def parse_text(language: Language, text: str, start: str | None = None, source: str = "") -> ParseOutcome:
    parser = Parser(language.grammar, start)
    result = parser.parse(text, source)
    if not result.ok:
        return ParseOutcome(None, None, result.diagnostics)
    selection = select(result.forest, source)
    diags = list(selection.diagnostics)
    if selection.tree is None:
        return ParseOutcome(None, None, diags, result.forest.count_trees())
    graph = build_instances(selection.tree, language.grammar, language.model, result.tokens, source)
    graph, ref_diags = resolve_references(graph, language.model)
    diags.extend(ref_diags)
    return ParseOutcome(selection.tree, graph, diags, result.forest.count_trees())
