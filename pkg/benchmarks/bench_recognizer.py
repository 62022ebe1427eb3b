"""Compare the compiled and pure-Python recognizers.

    python benchmarks/bench_recognizer.py [--repeat N]

Workloads: a long left-associative arithmetic chain and a mapping file made
of many copies of the bundled meta-model mapping.
"""

from __future__ import annotations

import argparse
import statistics
import time

from mcc.dsl import parse_mapping, repair_source
from mcc.engine.lexer import lex
from mcc.engine.recognizer import recognize_compiled, recognize_python
from mcc.engine.tables import build_tables
from mcc.pipeline import compile_language, fixture_text, load_model_text
from mcc.selfhost import meta_language


def _arith_workload(operands: int):
    model, _ = load_model_text(fixture_text("arith.asm"))
    doc, _ = parse_mapping(fixture_text("arith.mcd"))
    grammar = compile_language(model, [doc]).grammar
    ops = "+-*"
    text = "".join(f"{i % 10}{ops[i % 3]}" for i in range(operands - 1)) + "7"
    return grammar, text


def _mapping_workload(copies: int):
    grammar = meta_language().grammar
    text = "\n".join([repair_source(fixture_text("grammar_style.mcd"))[0]] * copies)
    return grammar, text


def _time(fn, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if recognize_compiled is None:
        print("compiled recognizer not built; only the pure-Python timing is shown")
    workloads = [("arith, 40 operands", *_arith_workload(40)),
                 ("arith, 120 operands", *_arith_workload(120)),
                 ("mapping, 20 copies", *_mapping_workload(20)),
                 ("mapping, 80 copies", *_mapping_workload(80))]
    print(f"{'workload':<22}{'tokens':>8}{'python s':>11}{'compiled s':>12}{'speedup':>9}")
    for name, grammar, text in workloads:
        tables = build_tables(grammar)
        tokens = tables.encode(t.kind for t in lex(grammar, text)[0])
        py = _time(lambda: recognize_python(tables, tokens), args.repeat)
        if recognize_compiled is not None:
            assert recognize_compiled(tables, tokens) == recognize_python(tables, tokens)
            c = _time(lambda: recognize_compiled(tables, tokens), args.repeat)
            print(f"{name:<22}{len(tokens):>8}{py:>11.4f}{c:>12.4f}{py / c:>8.1f}x")
        else:
            print(f"{name:<22}{len(tokens):>8}{py:>11.4f}{'-':>12}{'-':>9}")


if __name__ == "__main__":
    main()
