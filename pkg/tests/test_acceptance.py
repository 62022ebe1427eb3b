"""Acceptance criteria, one test each.  Every test records PASS/FAIL in the
terminal summary (and prints the line when run as a script)."""

from __future__ import annotations

import functools
import itertools
import random

import pytest

from mcc.asm import parse_model, render_model
from mcc.constraints import (canonicalize, check_consistency, lower, to_json, transitive_closure)
from mcc.dsl import (ConstraintDefinition, ElementPath, MappingDocument, escape_literal, parse_mapping,
                     render_mapping, repair_source)
from mcc.pipeline import compile_language, fixture_text, load_model_text, parse_text
from mcc.selfhost import graph_to_mapping

from conftest import ACCEPTANCE_RESULTS, language_of, mapping_of, model_of
from oracles import catalan, preferred_bracketings, render

STYLES = ("property_style.mcd", "grammar_style.mcd", "mixed_style.mcd")
MODELS = ("metamodel.asm", "arith.asm", "add.asm", "refs.asm")
MAPPINGS = STYLES + ("arith.mcd", "add.mcd")


def criterion(label):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                _record(label, False)
                raise
            _record(label, True)
        return run
    return wrap


def _record(label, ok):
    ACCEPTANCE_RESULTS.append((label, ok))
    print(f"{'PASS' if ok else 'FAIL'}  {label}")


def conflicts(diags):
    return [d for d in diags if d.code.endswith("-conflict")]


@criterion("1 three mapping styles lower to identical canonical forms")
def test_styles_are_equivalent():
    meta = model_of("metamodel.asm")
    serialized = []
    for name in STYLES:
        doc, diags = parse_mapping(fixture_text(name), name)
        assert not [d for d in diags if d.is_error], diags
        cset, diags = lower(doc, meta)
        assert not [d for d in diags if d.is_error], diags
        serialized.append(to_json(canonicalize(cset)))
    assert serialized[0] == serialized[1] == serialized[2]


@criterion("2 generated parser reproduces the bootstrap constraint sets")
def test_self_hosting_fixpoint():
    meta = model_of("metamodel.asm")
    generated = compile_language(meta, [mapping_of("grammar_style.mcd")])
    assert generated.ok, generated.diagnostics
    for name in STYLES:
        text, _ = repair_source(fixture_text(name))
        outcome = parse_text(generated, text, source=name)
        assert outcome.ok, (name, outcome.diagnostics)
        via_engine, d1 = lower(graph_to_mapping(outcome.graph, name), meta)
        bootstrap, d2 = lower(mapping_of(name), meta)
        assert d1 == [] and d2 == []
        assert set(via_engine.entries) == set(bootstrap.entries), name
        for key in bootstrap.entries:
            assert via_engine.entries[key] == bootstrap.entries[key], (name, key)
        assert via_engine.precedes == bootstrap.precedes


@criterion("3 property-style precedes pairs equal the closed precedence chain")
def test_precedes_pairs():
    meta = model_of("metamodel.asm")
    props, _ = lower(mapping_of("property_style.mcd"), meta)
    chain, _ = lower(mapping_of("grammar_style.mcd"), meta)
    expected = {("SequenceSpecification", "AlternationSpecification"),
                ("SequenceSpecification", "PrecedenceSpecification"),
                ("PrecedenceSpecification", "AlternationSpecification")}
    assert set(props.precedes) == expected
    assert set(props.precedes) == set(transitive_closure(chain.precedes))


@criterion("4 optional markers agree with the model; flipping one member gives one conflict")
def test_optional_markers():
    source = fixture_text("metamodel.asm")
    doc = mapping_of("grammar_style.mcd")

    def conflict_count(model_text):
        model, diags = load_model_text(model_text)
        assert not diags
        cset, lowering = lower(doc, model)
        return len(conflicts(lowering + check_consistency(cset, model)))

    assert conflict_count(source) == 0
    for original in ("constraintID: Identifier?", "constraint: ConstraintSpecification?"):
        flipped = source.replace(original, original.rstrip("?"))
        assert flipped != source
        assert conflict_count(flipped) == 1


@criterion("5 constraint on a missing member warns once and changes nothing else")
def test_nonexistent_member():
    meta = model_of("metamodel.asm")
    base_text = fixture_text("grammar_style.mcd")
    base, _ = lower(parse_mapping(base_text)[0], meta)
    doc, parse_diags = parse_mapping(base_text + 'ConstraintDefinition.nonexistent[prefix]: "@"\n')
    cset, lower_diags = lower(doc, meta)
    diags = parse_diags + lower_diags + check_consistency(cset, meta)
    assert len([d for d in diags if d.severity.value == "warning"]) == 1
    assert not [d for d in diags if d.is_error]
    assert to_json(canonicalize(cset)) == to_json(canonicalize(base))


ARITH_PRIORITY = {"+": 2, "-": 2, "*": 1}
ARITH_ASSOC = {"+": "left", "-": "left", "*": "left"}


def _shape(graph, node_id):
    node = graph.node(node_id)
    if node.element == "Lit":
        return node.slots["value"]
    op = {"Add": "+", "Sub": "-", "Mul": "*"}[node.element]
    return f"({_shape(graph, node.slots['left'].id)}{op}{_shape(graph, node.slots['right'].id)})"


@criterion("6 arithmetic: chosen tree is the unique filtered bracketing; forests are Catalan-sized")
def test_arithmetic_demo():
    lang = language_of("arith.asm", "arith.mcd")
    forest_sizes = {}
    for n in range(1, 6):
        operands = [str(i + 1) for i in range(n)]
        for ops in itertools.product("+-*", repeat=n - 1):
            text = "".join(a + b for a, b in zip(operands, ops)) + operands[-1]
            survivors = preferred_bracketings(operands, list(ops), ARITH_PRIORITY, ARITH_ASSOC)
            assert len(survivors) == 1, text
            outcome = parse_text(lang, text)
            assert outcome.ok, (text, outcome.diagnostics)
            assert _shape(outcome.graph, outcome.graph.root) == render(survivors[0]), text
            forest_sizes.setdefault(n, set()).add(outcome.trees)
    assert [forest_sizes[n] for n in range(2, 6)] == [{1}, {2}, {5}, {14}]
    assert [catalan(n - 1) for n in range(2, 6)] == [1, 2, 5, 14]


@criterion("7 references: one cross edge; duplicate and unknown ids give one error each")
def test_references():
    lang = language_of("refs.asm")
    three = parse_text(lang, fixture_text("refs_three.txt"))
    assert three.ok and len(three.graph.nodes) == 3
    assert len(three.graph.cross_edges()) == 1
    for name, code in (("refs_duplicate.txt", "duplicate-id"), ("refs_unknown.txt", "unknown-reference")):
        outcome = parse_text(lang, fixture_text(name))
        errors = [d for d in outcome.diagnostics if d.is_error]
        assert [d.code for d in errors] == [code], name


ALPHABET = 'ab*+"\\[]|<.( '


def _random_literal(rng):
    return "".join(rng.choice(ALPHABET) for _ in range(rng.randint(1, 4)))


def _random_mapping(rng, model):
    composites = [e for e in model.elements if e.members]
    tokens = [e for e in model.elements if e.kind.value == "token"]
    alternatives = [e for e in model.elements if e.variants]
    definitions = []
    for _ in range(rng.randint(1, 10)):
        roll = rng.random()
        if roll < 0.4:
            elem = rng.choice(composites)
            member = rng.choice(elem.members)
            kind = rng.choice(["prefix", "suffix"] + (["separator"] if member.repeats else []))
            values = " | ".join(f'"{escape_literal(_random_literal(rng))}"' for _ in range(rng.randint(1, 3)))
            definitions.append(f"{elem.name}.{member.name}[{kind}]: {values}")
        elif roll < 0.55:
            elem = rng.choice(tokens)
            pattern = rng.choice(['[a-z]+', '\\"[^\\"]*\\"', '(x|y)?z', '[0-9]+'])
            definitions.append(f'{elem.name}.{elem.value_name}: "{pattern}"')
        elif roll < 0.7:
            elem = rng.choice(composites)
            definitions.append(f"{elem.name}[priority]: {rng.randint(0, 5)}")
        elif roll < 0.8:
            elem = rng.choice(composites)
            definitions.append(f"{elem.name}[{rng.choice(['associativity', 'composition'])}]: "
                               f"{rng.choice(['left', 'right', 'non', 'eager', 'lazy'])}")
        else:
            alt = rng.choice(alternatives)
            chain = rng.sample(alt.variants, min(len(alt.variants), rng.randint(2, 4)))
            definitions.append(f"{alt.name}: {' < '.join(chain)}")
    return "\n".join(definitions) + "\n"


@criterion("8 model and mapping files round-trip; canonicalize is idempotent on 100 random mappings")
def test_round_trips_and_idempotence():
    for name in MODELS:
        model = parse_model(fixture_text(name))
        text = render_model(model)
        assert parse_model(text) == model and render_model(parse_model(text)) == text
    for name in MAPPINGS:
        doc, _ = parse_mapping(fixture_text(name))
        text = render_mapping(doc)
        again, diags = parse_mapping(text)
        assert again == doc and not diags and render_mapping(again) == text

    rng = random.Random(20261019)
    models = [model_of("metamodel.asm"), model_of("arith.asm")]
    for _ in range(100):
        model = rng.choice(models)
        text = _random_mapping(rng, model)
        doc, diags = parse_mapping(text)
        assert not [d for d in diags if d.is_error], (text, diags)
        assert parse_mapping(render_mapping(doc))[0] == doc
        cset, _ = lower(doc, model)
        once = canonicalize(cset)
        twice = canonicalize(once)
        assert once.entries == twice.entries and once.precedes == twice.precedes
        assert to_json(once) == to_json(twice)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
