"""Built-in consistency checks over the bundled (or user-supplied) fixtures."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .constraints import check_consistency, difference, equivalent, lower, transitive_closure
from .diagnostics import has_errors
from .dsl import parse_mapping, repair_source
from .pipeline import compile_language, fixture_text, load_model_text, parse_text
from .selfhost import graph_to_mapping


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


class _Fixtures:
    def __init__(self, directory: str | None):
        self.directory = Path(directory) if directory else None

    def text(self, name: str) -> str:
        if self.directory is not None and (self.directory / name).exists():
            return (self.directory / name).read_text(encoding="utf-8")
        return fixture_text(name)

    def model(self, name: str):
        model, diags = load_model_text(self.text(name), name)
        if model is None or has_errors(diags):
            raise ValueError(f"{name}: " + "; ".join(str(d) for d in diags))
        return model

    def mapping(self, name: str):
        doc, diags = parse_mapping(self.text(name), name)
        if has_errors(diags):
            raise ValueError(f"{name}: " + "; ".join(str(d) for d in diags))
        return doc


MAPPING_STYLES = ("property_style.mcd", "grammar_style.mcd", "mixed_style.mcd")


def _bootstrap(fx: _Fixtures) -> CheckResult:
    for name in MAPPING_STYLES:
        fx.mapping(name)
    return CheckResult("bootstrap reader accepts every mapping", True)


def _consistency(fx: _Fixtures) -> CheckResult:
    meta = fx.model("metamodel.asm")
    for name in MAPPING_STYLES:
        cset, diags = lower(fx.mapping(name), meta)
        errors = [d for d in diags + check_consistency(cset, meta) if d.is_error]
        if errors:
            return CheckResult("mappings agree with the model", False,
                               f"{name}: " + "; ".join(f"{d.code}: {d.message}" for d in errors))
    return CheckResult("mappings agree with the model", True)


def _equivalence(fx: _Fixtures) -> CheckResult:
    meta = fx.model("metamodel.asm")
    sets = [lower(fx.mapping(f), meta)[0] for f in MAPPING_STYLES]
    ok = all(equivalent(sets[0], s) for s in sets[1:])
    details = [f"{MAPPING_STYLES[0]} vs {name}: {sorted(difference(sets[0], s), key=str)}"
               for name, s in zip(MAPPING_STYLES[1:], sets[1:]) if not equivalent(sets[0], s)]
    return CheckResult("mapping styles are equivalent", ok, "; ".join(details))


def _fixpoint(fx: _Fixtures) -> CheckResult:
    meta = fx.model("metamodel.asm")
    language = compile_language(meta, [fx.mapping("grammar_style.mcd")])
    if not language.ok:
        return CheckResult("generated parser reads its own mappings", False, "meta grammar has errors")
    for name in MAPPING_STYLES:
        text, _ = repair_source(fx.text(name))
        outcome = parse_text(language, text, source=name)
        if not outcome.ok:
            return CheckResult("generated parser reads its own mappings", False,
                               f"{name}: " + "; ".join(str(d) for d in outcome.diagnostics))
        via_engine = lower(graph_to_mapping(outcome.graph, name), meta)[0]
        bootstrap = lower(fx.mapping(name), meta)[0]
        if via_engine.entries != bootstrap.entries or via_engine.precedes != bootstrap.precedes:
            return CheckResult("generated parser reads its own mappings", False,
                               f"{name}: {difference(via_engine, bootstrap)}")
    return CheckResult("generated parser reads its own mappings", True)


def _precedence_chain(fx: _Fixtures) -> CheckResult:
    meta = fx.model("metamodel.asm")
    props = lower(fx.mapping("property_style.mcd"), meta)[0]
    grammar = lower(fx.mapping("grammar_style.mcd"), meta)[0]
    ok = props.precedes == transitive_closure(grammar.precedes) and len(props.precedes) == 3
    return CheckResult("precedence chain closes", ok, str(sorted(props.precedes)))


def _arithmetic(fx: _Fixtures) -> CheckResult:
    model = fx.model("arith.asm")
    language = compile_language(model, [fx.mapping("arith.mcd")])
    expected = {"1+2*3": ("Add", 2), "1*2+3": ("Add", 2), "1-2-3": ("Sub", 2), "1+2+3+4": ("Add", 5)}
    for text, (top, trees) in expected.items():
        outcome = parse_text(language, text)
        root = outcome.graph.node(outcome.graph.root) if outcome.graph else None
        if not outcome.ok or root.element != top or outcome.trees != trees:
            return CheckResult("arithmetic disambiguation", False, text)
    return CheckResult("arithmetic disambiguation", True)


CHECKS: list[Callable[[_Fixtures], CheckResult]] = [
    _bootstrap, _consistency, _equivalence, _fixpoint, _precedence_chain, _arithmetic]


_NAMES = {_bootstrap: "bootstrap reader accepts every mapping", _consistency: "mappings agree with the model",
          _equivalence: "mapping styles are equivalent", _fixpoint: "generated parser reads its own mappings"}


def run_selftest(fixtures: str | None = None) -> list[CheckResult]:
    fx = _Fixtures(fixtures)
    results = []
    for check in CHECKS:
        try:
            results.append(check(fx))
        except Exception as exc:  # a broken fixture fails its check, not the run
            results.append(CheckResult(_NAMES.get(check, check.__name__.strip("_")), False,
                                       f"{type(exc).__name__}: {exc}"))
    return results


__all__ = ["CheckResult", "run_selftest"]
