"""Command-line interface: ``mcc check|grammar|parse|selftest``."""

from __future__ import annotations

import argparse
import json
import sys

from .constraints import to_json
from .csm import export_grammar
from .diagnostics import format_diagnostic, has_errors
from .dsl import repair_source
from .engine.instances import NodeRef, RefValue, graph_to_dict
from .pipeline import compile_language, load_mapping, load_model, parse_text
from .selfhost import meta_language

EXIT_OK, EXIT_ERRORS, EXIT_USAGE = 0, 1, 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcc", description="Metamodel-driven parser generator.")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="validate a model and its mappings")
    check.add_argument("model")
    check.add_argument("mappings", nargs="*")
    check.add_argument("--strict", action="store_true", help="reject mapping files that need repair")
    check.add_argument("--format", choices=("text", "json"), default="text")

    grammar = sub.add_parser("grammar", help="print the derived grammar")
    grammar.add_argument("model")
    grammar.add_argument("mappings", nargs="*")
    grammar.add_argument("--format", choices=("ebnf", "json"), default="ebnf")
    grammar.add_argument("--start")
    grammar.add_argument("--strict", action="store_true")

    parse = sub.add_parser("parse", help="parse an input file into an instance graph")
    parse.add_argument("model")
    parse.add_argument("files", nargs="+", metavar="mapping... input")
    parse.add_argument("--start")
    parse.add_argument("--format", choices=("text", "json"), default="text")
    parse.add_argument("--strict", action="store_true")

    selftest = sub.add_parser("selftest", help="run built-in checks")
    selftest.add_argument("--fixtures", help="directory whose files replace the bundled fixtures")
    return parser


def _report(diags, stream) -> None:
    for d in diags:
        print(format_diagnostic(d), file=stream)


def _language(args, start=None):
    model, diags = load_model(args.model)
    if model is None or has_errors(diags):
        return None, diags
    docs = []
    for path in args.mappings:
        doc, d = load_mapping(path, strict=args.strict)
        docs.append(doc)
        diags.extend(d)
    language = compile_language(model, docs, start)
    return language, diags + language.diagnostics


def _check(args) -> int:
    language, diags = _language(args)
    if args.format == "json":
        payload = {
            "ok": not has_errors(diags),
            "diagnostics": [d.to_json() for d in diags],
            "constraints": json.loads(to_json(language.constraints)) if language else None,
        }
        print(json.dumps(payload, indent=2))
    else:
        _report(diags, sys.stderr)
        errors = sum(d.is_error for d in diags)
        print(f"{errors} error(s), {len(diags) - errors} other diagnostic(s)", file=sys.stderr)
    return EXIT_ERRORS if has_errors(diags) else EXIT_OK


def _grammar(args) -> int:
    language, diags = _language(args, args.start)
    _report(diags, sys.stderr)
    if language is None or has_errors(diags):
        return EXIT_ERRORS
    sys.stdout.write(export_grammar(language.grammar, args.format))
    return EXIT_OK


def _render_graph(graph) -> str:
    lines: list[str] = []

    def show(value):
        if isinstance(value, NodeRef):
            return f"#{value.id}"
        if isinstance(value, RefValue):
            return f"->{value.text}"
        if isinstance(value, list):
            return "[" + ", ".join(show(v) for v in value) + "]"
        return json.dumps(value)

    for node in graph.nodes:
        slots = " ".join(f"{k}={show(v)}" for k, v in node.slots.items())
        lines.append(f"#{node.id} {node.element} {slots}".rstrip())
    for edge in graph.cross_edges():
        lines.append(f"#{edge.source}.{edge.member} -> #{edge.target}")
    return "\n".join(lines) + "\n"


def _parse(args) -> int:
    *args.mappings, input_path = args.files
    language, diags = _language(args, args.start)
    if language is None or has_errors(diags):
        _report(diags, sys.stderr)
        return EXIT_ERRORS
    with open(input_path, encoding="utf-8") as fh:
        text = fh.read()
    if language.model.name == meta_language().model.name:
        # mapping files get the same lenient repairs as the bootstrap reader
        text, repairs = repair_source(text, args.strict)
        diags = diags + repairs
    outcome = parse_text(language, text, args.start, input_path)
    diags = diags + outcome.diagnostics
    _report(diags, sys.stderr)
    if outcome.graph is not None:
        if args.format == "json":
            print(json.dumps(graph_to_dict(outcome.graph), indent=2))
        else:
            sys.stdout.write(_render_graph(outcome.graph))
    return EXIT_ERRORS if has_errors(diags) or outcome.graph is None else EXIT_OK


def _selftest(args) -> int:
    from .selftest import run_selftest
    results = run_selftest(args.fixtures)
    for r in results:
        line = f"{'PASS' if r.ok else 'FAIL'} {r.name}"
        print(line + (f": {r.detail}" if r.detail and not r.ok else ""))
    return EXIT_OK if all(r.ok for r in results) else EXIT_ERRORS


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"check": _check, "grammar": _grammar, "parse": _parse, "selftest": _selftest}[args.command]
    try:
        return handler(args)
    except OSError as exc:
        print(f"mcc: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
