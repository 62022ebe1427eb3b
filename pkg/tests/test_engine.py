import os
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from mcc.asm import parse_model
from mcc.dsl import parse_mapping
from mcc.dsl import repair_source
from mcc.engine import (Parser, build_instances, disambiguate, graph_to_dict, lex, parse, select,
                        unparse)
from mcc.engine.recognizer import recognize_compiled, recognize_python
from mcc.engine.tables import build_tables
from mcc.pipeline import compile_language, fixture_text, parse_text

from conftest import language_of
from oracles import catalan, count_derivations


def build(model_src, mapping_src=""):
    doc, _ = parse_mapping(mapping_src)
    lang = compile_language(parse_model(model_src), [doc])
    assert lang.ok, lang.diagnostics
    return lang


# --- lexer --------------------------------------------------------------------

def test_literal_beats_pattern_of_equal_length(refs):
    kinds = [t.kind for t in lex(refs.grammar, "def define use")[0]]
    assert kinds == ['"def"', "Name", '"use"']


def test_longest_match_wins(meta):
    g = language_of("metamodel.asm", "grammar_style.mcd").grammar
    kinds = [t.kind for t in lex(g, "trueish true 12")[0]]
    assert kinds == ["Identifier", "Boolean", "Integer"]


def test_skip_needs_a_strictly_longer_match():
    lang = build('language L\nskip " "\nskip "#[a-z]*"\nelement A { xs: T* }\ntoken T @Pattern("#|[a-z]+")')
    toks = lex(lang.grammar, "ab # #cd")[0]
    assert [t.text for t in toks] == ["ab", "#"]
    assert (toks[1].line, toks[1].column) == (1, 4)


def test_lex_error_is_reported_and_lexing_resumes(arith):
    tokens, diags = lex(arith.grammar, "1 +\n 2 $$ 3")
    assert [t.text for t in tokens] == ["1", "+", "2", "3"]
    (diag,) = diags
    assert diag.code == "lex-error" and diag.is_error
    assert (diag.location.line, diag.location.column) == (2, 4)


def test_parse_stops_on_lex_errors(arith):
    result = parse(arith.grammar, "1 + $")
    assert not result.ok and [d.code for d in result.diagnostics] == ["lex-error"]


# --- recognizer ---------------------------------------------------------------

arith_tokens = st.lists(st.sampled_from(["1", "+", "-", "*", "(", ")"]), max_size=12)


@pytest.mark.skipif(recognize_compiled is None, reason="compiled recognizer not built")
@settings(max_examples=200)
@given(arith_tokens)
def test_backends_agree_on_arbitrary_input(arith, pieces):
    t = build_tables(arith.grammar)
    tokens = t.encode(tok.kind for tok in lex(arith.grammar, " ".join(pieces))[0])
    assert recognize_compiled(t, tokens) == recognize_python(t, tokens)


def test_backend_can_be_forced_to_python():
    env = dict(os.environ, MCC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from mcc.engine import disambiguate, unparse, BACKEND; print(BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


# --- forests ------------------------------------------------------------------

@settings(max_examples=150)
@given(arith_tokens)
def test_forest_size_matches_brute_force(arith, pieces):
    text = " ".join(pieces)
    kinds = [t.kind for t in lex(arith.grammar, text)[0]]
    expected = count_derivations(arith.grammar, kinds)
    result = parse(arith.grammar, text)
    assert result.ok == (expected > 0)
    if result.ok:
        assert result.forest.count_trees() == expected


@pytest.mark.parametrize("operands", range(1, 8))
def test_operator_chain_forest_is_catalan(arith, operands):
    result = parse(arith.grammar, "+".join(["1"] * operands))
    assert result.forest.count_trees() == catalan(operands - 1)


def test_rejection_reports_furthest_token_and_expectations(arith):
    result = parse(arith.grammar, "1 + * 2")
    (diag,) = result.diagnostics
    assert diag.code == "syntax-error"
    assert (diag.location.line, diag.location.column) == (1, 5)
    assert '"("' in diag.message and "Lit" in diag.message


def test_unexpected_end_of_input(arith):
    (diag,) = parse(arith.grammar, "(1 +").diagnostics
    assert "end of input" in diag.message


def test_incomplete_operation_expects_an_expression(arith):
    (diag,) = parse(arith.grammar, "1+").diagnostics
    assert "end of input" in diag.message and "Expr" in diag.message


def test_empty_input_for_nullable_start(refs):
    outcome = parse_text(refs, "")
    assert outcome.ok and graph_to_dict(outcome.graph)["nodes"] == [{"id": 0, "element": "Program",
                                                                      "members": {"items": []}}]


# --- disambiguation -----------------------------------------------------------

def shape(graph, node_id=None):
    node = graph.node(graph.root if node_id is None else node_id)
    if node.element == "Lit":
        return node.slots["value"]
    if node.element == "Group":
        return shape(graph, node.slots["inner"].id)
    op = {"Add": "+", "Sub": "-", "Mul": "*"}[node.element]
    return f"({shape(graph, node.slots['left'].id)}{op}{shape(graph, node.slots['right'].id)})"


@pytest.mark.parametrize("text, expected", [
    ("1+2*3", "(1+(2*3))"),
    ("1*2+3", "((1*2)+3)"),
    ("1-2-3", "((1-2)-3)"),
    ("1-2+3", "((1-2)+3)"),
    ("2*(3+4)", "(2*(3+4))"),
])
def test_arithmetic_choices(arith, text, expected):
    outcome = parse_text(arith, text)
    assert outcome.ok, outcome.diagnostics
    assert shape(outcome.graph) == expected


def test_residual_ambiguity_is_an_error_only_when_present():
    lang = language_of("add.asm", "add.mcd")
    assert parse_text(lang, "1+2").ok
    outcome = parse_text(lang, "1+2+3")
    assert [d.code for d in outcome.diagnostics] == ["ambiguous"]
    message = outcome.diagnostics[0].message
    assert "[0:3]" in message and "[2:5]" in message


def test_disambiguate_returns_tree_and_diagnostics(arith):
    result = parse(arith.grammar, "1+2*3")
    tree, diags = disambiguate(result.forest, arith.grammar)
    assert diags == [] and tree.key[1:] == (0, 5)


def test_non_associative_nesting_is_reported():
    lang = build('language L\nskip " "\nelement E = Eq | N\nelement Eq { l: E r: E }\ntoken N @Pattern("[0-9]")',
                 'Eq.r[prefix]: "="\nEq[associativity]: non')
    assert parse_text(lang, "1 = 2").ok
    outcome = parse_text(lang, "1 = 2 = 3")
    assert "non-associative" in [d.code for d in outcome.diagnostics]


@pytest.mark.parametrize("policy, sizes", [("eager", [3]), ("lazy", [1, 1, 1])])
def test_composition_policy(policy, sizes):
    lang = build('language L\nskip " "\nelement Doc { items: Item* }\n'
                 f'element Item @Composition({policy}) {{ words: W+ }}\ntoken W @Pattern("[a-z]+")')
    outcome = parse_text(lang, "a b c")
    assert outcome.ok, outcome.diagnostics
    g = outcome.graph
    assert [len(g.node(r.id).slots["words"]) for r in g.node(g.root).slots["items"]] == sizes


# --- instances ----------------------------------------------------------------

def test_instances_are_numbered_in_pre_order(arith):
    g = parse_text(arith, "1+2*3").graph
    assert [n.element for n in g.nodes] == ["Add", "Lit", "Mul", "Lit", "Lit"]
    contained = [(n.id, m, v.id) for n in g.nodes for m, v in n.slots.items() if hasattr(v, "id")]
    assert contained == [(0, "left", 1), (0, "right", 2), (2, "left", 3), (2, "right", 4)]
    assert g.edges == [] and g.roots == [0]


def test_graph_json_shape(refs):
    data = graph_to_dict(parse_text(refs, "def a use a").graph)
    assert data["roots"] == [0]
    assert data["edges"] == [{"from": 2, "member": "target", "to": 1}]
    assert data["nodes"][0]["members"] == {"items": [{"node": 1}, {"node": 2}]}
    assert data["nodes"][2]["members"]["target"] == {"ref": "a"}


def test_token_root_gets_a_value_slot(arith):
    g = parse_text(arith, "42").graph
    assert graph_to_dict(g)["nodes"] == [{"id": 0, "element": "Lit", "members": {"value": "42"}}]


def test_references_resolve_to_cross_edges(refs):
    outcome = parse_text(refs, "def a def b use b")
    assert outcome.ok
    (edge,) = outcome.graph.cross_edges()
    assert (outcome.graph.node(edge.source).element, outcome.graph.node(edge.target).slots["name"]) == ("Use", "b")


def test_unknown_reference_suggests_near_misses(refs):
    outcome = parse_text(refs, "def alpha use alpah")
    (diag,) = outcome.diagnostics
    assert diag.code == "unknown-reference" and "'alpha'" in diag.message
    assert (diag.location.line, diag.location.column) == (1, 11)


def test_duplicate_id_points_at_both_definitions(refs):
    outcome = parse_text(refs, "def a\ndef a")
    (diag,) = outcome.diagnostics
    assert diag.code == "duplicate-id"
    assert diag.location.line == 2 and diag.related.line == 1


def test_select_and_build_without_pipeline(arith):
    result = Parser(arith.grammar).parse("1*2")
    tree = select(result.forest).tree
    graph = build_instances(tree, arith.grammar, arith.model)
    assert graph.node(graph.root).element == "Mul"


@pytest.mark.parametrize("text", ["1+2*3", "(1-2)*3", "4", "((7))"])
def test_unparse_reproduces_arithmetic_tokens(arith, text):
    outcome = parse_text(arith, text)
    assert unparse(outcome.graph, arith.grammar) == [t.text for t in lex(arith.grammar, text)[0]]


def test_unparse_reproduces_lists_and_references(refs):
    text = "def a def b use a use b"
    outcome = parse_text(refs, text)
    assert unparse(outcome.graph, refs.grammar) == text.split()


@pytest.mark.parametrize("name", ["property_style.mcd", "grammar_style.mcd", "mixed_style.mcd"])
def test_unparse_reproduces_mapping_files(name):
    meta = language_of("metamodel.asm", "grammar_style.mcd")
    text, _ = repair_source(fixture_text(name))
    outcome = parse_text(meta, text, source=name)
    assert unparse(outcome.graph, meta.grammar) == [t.text for t in lex(meta.grammar, text)[0]]


expressions = st.recursive(st.sampled_from("0123456789"),
                           lambda inner: st.one_of(st.tuples(inner, st.sampled_from("+-*"), inner).map("".join),
                                                   inner.map(lambda e: f"({e})")),
                           max_leaves=6)


@settings(max_examples=60, deadline=None)
@given(expressions)
def test_unparse_round_trip_on_arithmetic(arith, text):
    outcome = parse_text(arith, text)
    assert outcome.ok, outcome.diagnostics
    assert "".join(unparse(outcome.graph, arith.grammar)) == text


SEPARATED = 'language L\nelement P { parts: X+ }\ntoken X @Pattern("x")'


@pytest.mark.parametrize("text, accepted", [("x", True), ("x.x", True), ("x.x.x", True), ("x.", False),
                                            (".x", False), ("xx", False)])
def test_separator_list(text, accepted):
    lang = build(SEPARATED, 'P.parts[separator]: "."')
    outcome = parse_text(lang, text)
    assert outcome.ok == accepted, outcome.diagnostics
    if accepted:
        assert len(outcome.graph.node(outcome.graph.root).slots["parts"]) == text.count("x")


def test_single_token_language_parses_to_one_node():
    lang = build('language L\ntoken T @Pattern("[a-z]+")')
    outcome = parse_text(lang, "abc")
    assert outcome.ok and graph_to_dict(outcome.graph)["nodes"] == [{"id": 0, "element": "T",
                                                                      "members": {"value": "abc"}}]
    assert not parse_text(lang, "abc def").ok


def _in_forest(forest, tree):
    if tree.prod is None:
        return forest.is_token(tree.key)
    children = tuple(c.key for c in tree.children)
    return (any(d.prod == tree.prod and d.children == children for d in forest.nodes.get(tree.key, ()))
            and all(_in_forest(forest, c) for c in tree.children))


@settings(max_examples=60, deadline=None)
@given(expressions)
def test_chosen_tree_belongs_to_the_forest(arith, text):
    result = parse(arith.grammar, text)
    tree, diags = disambiguate(result.forest, arith.grammar)
    assert diags == [] and _in_forest(result.forest, tree)
