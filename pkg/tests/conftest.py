import pytest

from mcc.dsl import parse_mapping
from mcc.pipeline import compile_language, fixture_text, load_model_text


def model_of(name):
    model, diags = load_model_text(fixture_text(name), name)
    assert model is not None, diags
    return model


def mapping_of(name):
    doc, _ = parse_mapping(fixture_text(name), name)
    return doc


def language_of(model_name, *mapping_names):
    return compile_language(model_of(model_name), [mapping_of(m) for m in mapping_names])


@pytest.fixture(scope="session")
def meta():
    return model_of("metamodel.asm")


@pytest.fixture(scope="session")
def arith():
    lang = language_of("arith.asm", "arith.mcd")
    assert lang.ok, lang.diagnostics
    return lang


@pytest.fixture(scope="session")
def refs():
    lang = language_of("refs.asm")
    assert lang.ok, lang.diagnostics
    return lang


# acceptance criteria record their outcome here; printed after the run
ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
