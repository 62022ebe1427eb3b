"""Reading mapping files with the parser generated from the meta-model."""

from __future__ import annotations

from functools import lru_cache

from .diagnostics import Diagnostic, error
from .dsl import (AlternationSpec, BooleanValue, ClosureSpec, ConstraintDefinition, ElementPath, ElementRef,
                  IntegerValue, MappingDocument, OptionalSpec, ParenSpec, PatternLiteral, PositiveSpec,
                  PrecedenceSpec, SequenceSpec, parse_mapping, repair_source, unescape_literal)
from .engine.instances import InstanceGraph, NodeRef
from .pipeline import Language, compile_language, fixture_text, load_model_text, parse_text

METAMODEL = "metamodel.asm"
BOOTSTRAP_MAPPING = "grammar_style.mcd"


@lru_cache(maxsize=1)
def meta_language() -> Language:
    """The mapping language, generated from the meta-model and its own mapping."""
    model, diags = load_model_text(fixture_text(METAMODEL), METAMODEL)
    doc, d = parse_mapping(fixture_text(BOOTSTRAP_MAPPING), BOOTSTRAP_MAPPING)
    language = compile_language(model, [doc])
    language.diagnostics[:0] = diags + d
    return language


class _Reader:
    def __init__(self, graph: InstanceGraph):
        self.graph = graph

    def node(self, ref):
        return self.graph.node(ref.id)

    def document(self, source: str) -> MappingDocument:
        root = self.graph.node(self.graph.root)
        return MappingDocument(tuple(self.definition(self.node(r)) for r in root.slots["definitions"]), source)

    def path(self, inst) -> ElementPath:
        return ElementPath(tuple(inst.slots["name"]), inst.location)

    def definition(self, inst) -> ConstraintDefinition:
        constraint = inst.slots.get("constraint")
        return ConstraintDefinition(
            self.path(self.node(inst.slots["target"])),
            inst.slots.get("constraintID"),
            self.spec(self.node(constraint)) if isinstance(constraint, NodeRef) else None,
            inst.location,
        )

    def spec(self, inst):
        kind = inst.element
        if kind in ("SequenceSpecification", "PrecedenceSpecification", "AlternationSpecification"):
            parts = tuple(self.spec(self.node(r)) for r in inst.slots["constraints"])
            return {"SequenceSpecification": SequenceSpec, "PrecedenceSpecification": PrecedenceSpec,
                    "AlternationSpecification": AlternationSpec}[kind](parts)
        wrappers = {"ClausureSpecification": ClosureSpec, "OptionalSpecification": OptionalSpec,
                    "PositiveClauseSpecification": PositiveSpec, "ParenthesizedSpecification": ParenSpec}
        if kind in wrappers:
            return wrappers[kind](self.spec(self.node(inst.slots["constraint"])))
        if kind == "PatternSpecification":
            raw = inst.slots["pattern"][1:-1]
            return PatternLiteral(unescape_literal(raw), raw)
        if kind == "Element":
            return ElementRef(self.path(inst))
        if kind == "Boolean":
            return BooleanValue(inst.slots["value"] == "true")
        if kind == "Integer":
            return IntegerValue(int(inst.slots["value"]))
        raise ValueError(f"unexpected instance {kind}")


def graph_to_mapping(graph: InstanceGraph, source: str = "") -> MappingDocument:
    return _Reader(graph).document(source)


def selfhost_parse(text: str, source: str = "", strict: bool = False,
                   language: Language | None = None) -> tuple[MappingDocument | None, list[Diagnostic]]:
    """Parse mapping text with the generated parser (lenient repairs first)."""
    language = language or meta_language()
    if not language.ok:
        return None, [error("bootstrap", "the meta-model grammar could not be built")] + language.diagnostics
    repaired, diags = repair_source(text, strict)
    outcome = parse_text(language, repaired, source=source)
    diags = diags + outcome.diagnostics
    if not outcome.ok:
        return None, diags
    return graph_to_mapping(outcome.graph, source), diags
