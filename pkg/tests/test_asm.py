import pytest
from hypothesis import given, strategies as st

from mcc.asm import (ElementKind, ModelSyntaxError, PathError, parse_model, render_model, resolve_path,
                     validate_model)
from mcc.kinds import UNBOUNDED, ConstraintKind
from mcc.pipeline import fixture_text

FIXTURE_MODELS = ["metamodel.asm", "arith.asm", "add.asm", "refs.asm"]


def codes(diags):
    return [d.code for d in diags]


def test_metamodel_shape():
    model = parse_model(fixture_text("metamodel.asm"))
    assert model.name == "ConstraintMapping"
    spec = model.element("ConstraintSpecification")
    assert spec.kind is ElementKind.ALTERNATIVE
    assert len(spec.variants) == 11
    seq = model.element("SequenceSpecification").member("constraints")
    assert (seq.min, seq.max) == (2, UNBOUNDED)
    cd = model.element("ConstraintDefinition")
    assert cd.member("constraintID").optional and not cd.member("target").optional
    assert model.element("Identifier").kind is ElementKind.TOKEN
    assert model.element("PatternSpecification").value_name == "pattern"
    assert validate_model(model) == []


@pytest.mark.parametrize("name", FIXTURE_MODELS)
def test_render_round_trip(name):
    model = parse_model(fixture_text(name))
    text = render_model(model)
    again = parse_model(text)
    assert again == model
    assert render_model(again) == text


@pytest.mark.parametrize("suffix, expected", [
    ("", (1, 1)), ("?", (0, 1)), ("*", (0, UNBOUNDED)), ("+", (1, UNBOUNDED)),
    ("{3}", (3, 3)), ("{2,5}", (2, 5)), ("{0,*}", (0, UNBOUNDED)),
])
def test_multiplicities(suffix, expected):
    model = parse_model(f"language L\nelement A {{ x: T{suffix} }}\ntoken T @Pattern(\"t\")")
    m = model.element("A").member("x")
    assert (m.min, m.max) == expected


def test_member_annotations_fold_into_multiplicity():
    model = parse_model('language L\nelement A { x: T @Optional @Maximum(4) }\ntoken T @Pattern("t")')
    m = model.element("A").member("x")
    assert (m.min, m.max) == (0, 4)


def test_delimiter_annotations_are_tuples():
    model = parse_model('language L\nelement A @Prefix("a", "b") { x: T @Separator(",") }\ntoken T @Pattern("t")')
    a = model.element("A")
    assert a.annotation(ConstraintKind.PREFIX) == ("a", "b")
    assert a.annotation(ConstraintKind.SEPARATOR, "x") == (",",)


@pytest.mark.parametrize("source, code", [
    ('language L\nelement A { x: Missing }', "unknown-element"),
    ('language L\nelement A = B\nelement B = A', "alternative-cycle"),
    ('language L\nelement A { id x: B }\nelement B { }', "id-not-token"),
    ('language L\nelement A { ref x: B }\nelement B { y: T }\ntoken T @Pattern("t")', "ref-without-id"),
    ('language L\nelement A { x: T{3,2} }\ntoken T @Pattern("t")', "bad-multiplicity"),
    ('language L\ntoken T @Pattern("a{2}")', "bad-pattern"),
    ('language L\nskip "("\ntoken T @Pattern("t")', "bad-pattern"),
])
def test_validation_errors(source, code):
    assert code in codes(validate_model(parse_model(source)))


@pytest.mark.parametrize("source", [
    "element A { }",                                   # no language line
    "language L\nelement A { x T }",                   # missing colon
    "language L\nelement A @Bogus { }",                # unknown annotation
    "language L\nelement A { x: T }\nelement A { }",   # duplicate element
    'language L\ntoken T @Associativity(sideways)',    # bad value
])
def test_syntax_errors(source):
    with pytest.raises(ModelSyntaxError):
        parse_model(source)


def test_resolve_path():
    model = parse_model(fixture_text("metamodel.asm"))
    assert resolve_path(model, ("Element",)).kind == "element"
    t = resolve_path(model, ("Identifier", "name"))
    assert t.kind == "member" and t.value_slot
    missing = resolve_path(model, ("Element", "bogus"))
    assert missing.missing and missing.prefix.element == "Element"
    assert resolve_path(model, ("Nope",)).missing
    with pytest.raises(PathError):
        resolve_path(model, ("A", "b", "c"))


names = st.from_regex(r"[A-Z][a-z]{0,6}", fullmatch=True)


@given(st.lists(names, min_size=1, max_size=6, unique=True), st.sampled_from(["", "?", "*", "+", "{2,4}"]))
def test_generated_models_round_trip(elements, suffix):
    lines = ["language Gen", 'token Tok @Pattern("[a-z]+")']
    for i, name in enumerate(elements):
        if name == "Tok":
            continue
        lines.append(f"element {name} @Priority({i}) {{ m{i}: Tok{suffix} }}")
    model = parse_model("\n".join(lines))
    assert parse_model(render_model(model)) == model
