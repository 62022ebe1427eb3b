import json

import pytest

from mcc.asm import parse_model
from mcc.csm import derive_grammar, export_grammar, grammar_from_dict, grammar_to_dict
from mcc.dsl import parse_mapping
from mcc.pipeline import compile_language

from conftest import language_of


def rules(grammar):
    return [f"{p.lhs} ::= {' '.join(p.rhs)}".rstrip() for p in grammar.productions]


def build(model_src, mapping_src="", start=None):
    model = parse_model(model_src)
    doc, diags = parse_mapping(mapping_src)
    assert not [d for d in diags if d.is_error]
    lang = compile_language(model, [doc], start)
    return lang


def test_add_demo_grammar():
    lang = language_of("add.asm", "add.mcd")
    assert rules(lang.grammar) == ["Expr ::= Add", "Expr ::= Lit", 'Add ::= Expr "+" Expr']
    ebnf = export_grammar(lang.grammar, "ebnf")
    assert ebnf.count("::=") == 3
    assert "Lit = /[0-9]+/ ;" in ebnf


def test_refs_grammar_uses_identifier_token_for_references():
    lang = language_of("refs.asm")
    assert rules(lang.grammar) == [
        "Program.items.list ::= Item",
        "Program.items.list ::= Program.items.list Item",
        "Program.items.opt ::=",
        "Program.items.opt ::= Program.items.list",
        "Program ::= Program.items.opt",
        "Item ::= Decl",
        "Item ::= Use",
        'Decl ::= "def" Name',
        'Use ::= "use" Name',
    ]
    use = lang.grammar.productions[-1]
    assert use.provenance.element == "Use" and use.roles == (None, "target")


def test_bounded_list_is_expanded():
    lang = build('language L\nelement A { xs: T{2,3} }\ntoken T @Pattern("t")', 'A.xs[separator]: ","')
    assert rules(lang.grammar)[:2] == ['A.xs.list ::= T "," T', 'A.xs.list ::= T "," T "," T']


def test_several_delimiter_values_get_a_nonterminal():
    lang = build('language L\nelement A { x: T }\ntoken T @Pattern("t")', 'A.x[prefix]: "a" | "b"')
    assert 'A.x.prefix ::= "a"' in rules(lang.grammar)
    assert "A ::= A.x.prefix T" in rules(lang.grammar)


def test_member_order_changes_production():
    lang = build('language L\nelement A { x: T y: T }\ntoken T @Pattern("t")', 'A: y "=" x')
    assert rules(lang.grammar) == ['A ::= T "=" T']
    assert lang.grammar.productions[0].roles == ("y", None, "x")


def test_precedes_orders_variants_and_reaches_disambiguation():
    lang = language_of("arith.asm", "arith.mcd")
    assert rules(lang.grammar)[0] == "Expr ::= Mul"
    d = lang.grammar.disambiguation
    assert d.precedes == {("Mul", "Add"), ("Mul", "Sub")}
    assert d.associativity == {"Add": "left", "Sub": "left", "Mul": "left"}


def test_missing_pattern_is_an_error():
    lang = build("language L\nelement A { x: T }\ntoken T")
    assert [d.code for d in lang.diagnostics] == ["missing-pattern"]


def test_unknown_start_and_unreachable_elements():
    lang = build('language L\nelement A { x: T }\nelement B { y: T }\ntoken T @Pattern("t")')
    assert [d.code for d in lang.diagnostics] == ["unreachable-element"]
    lang = build('language L\nelement A { x: T }\ntoken T @Pattern("t")', start="Nope")
    assert "unknown-start" in [d.code for d in lang.diagnostics]


def test_json_export_round_trip():
    g = language_of("metamodel.asm", "grammar_style.mcd").grammar
    data = json.loads(export_grammar(g, "json"))
    assert grammar_from_dict(data) == g
    assert data == grammar_to_dict(g)


def test_unknown_export_format():
    g = language_of("add.asm", "add.mcd").grammar
    with pytest.raises(ValueError):
        export_grammar(g, "yacc")


def test_literal_tokens_outrank_patterns():
    g = language_of("refs.asm").grammar
    prio = {t.name: t.priority for t in g.tokens}
    assert prio['"def"'] > prio["Name"]


def test_meta_grammar_is_well_formed(meta):
    lang = language_of("metamodel.asm", "grammar_style.mcd")
    assert lang.ok and lang.diagnostics == []
    g = lang.grammar
    assert g.start == "MappingFile"
    defined = g.nonterminals
    for p in g.productions:
        for sym in p.rhs:
            assert sym in defined or sym in g.terminals
        assert len(p.roles) == len(p.rhs)


def test_single_token_model():
    lang = build('language L\ntoken T @Pattern("[a-z]+")')
    assert lang.ok and lang.grammar.start == "T"
    assert lang.grammar.productions == [] or rules(lang.grammar) == []
    assert [t.name for t in lang.grammar.tokens] == ["T"]


def test_grammars_of_the_three_styles_are_identical():
    exports = {export_grammar(language_of("metamodel.asm", name).grammar, "json")
               for name in ("property_style.mcd", "grammar_style.mcd", "mixed_style.mcd")}
    assert len(exports) == 1
