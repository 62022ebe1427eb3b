"""Maximal-munch tokenizer driven by a grammar's token table."""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from ..csm import Grammar
from ..diagnostics import Diagnostic, Span, error
from ..patterns import compile_pattern


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int
    line: int
    column: int


class LineIndex:
    """Offset to 1-based (line, column) conversion."""

    def __init__(self, text: str):
        self.starts = [0] + [i + 1 for i, ch in enumerate(text) if ch == "\n"]

    def position(self, offset: int) -> tuple[int, int]:
        row = bisect.bisect_right(self.starts, offset) - 1
        return row + 1, offset - self.starts[row] + 1

    def span(self, start: int, end: int, source: str = "") -> Span:
        line, column = self.position(start)
        end_line, end_column = self.position(end)
        return Span(line, column, end_line, end_column, source)


def lex(grammar: Grammar, text: str, source: str = "") -> tuple[list[Token], list[Diagnostic]]:
    """Split ``text`` into tokens.

    At each offset the longest token match wins; equal lengths go to the
    higher priority, then to the earlier declaration.  A skip pattern is
    consumed instead when its match is strictly longer than any token match.
    Unmatchable characters are reported and skipped one at a time.
    """
    table = [(compile_pattern(t.pattern), -t.priority, order, t.name) for order, t in enumerate(grammar.tokens)]
    skips = [compile_pattern(s) for s in grammar.skip]
    lines = LineIndex(text)
    out: list[Token] = []
    diags: list[Diagnostic] = []
    pos = 0
    bad_start = None
    while pos < len(text):
        best = None
        for regex, neg_priority, order, name in table:
            m = regex.match(text, pos)
            if m is None or m.end() == pos:
                continue
            rank = (-(m.end() - pos), neg_priority, order)
            if best is None or rank < best[0]:
                best = (rank, name, m.end())
        token_len = best[2] - pos if best else 0
        skip_end = max((m.end() for m in (r.match(text, pos) for r in skips) if m), default=pos)
        if best is None and skip_end == pos:
            if bad_start is None:
                bad_start = pos
            pos += 1
            continue
        if bad_start is not None:
            diags.append(_bad_text(text, bad_start, pos, lines, source))
            bad_start = None
        if skip_end - pos > token_len:
            pos = skip_end
            continue
        line, column = lines.position(pos)
        out.append(Token(best[1], text[pos:best[2]], pos, best[2], line, column))
        pos = best[2]
    if bad_start is not None:
        diags.append(_bad_text(text, bad_start, pos, lines, source))
    return out, diags


def _bad_text(text, start, end, lines, source) -> Diagnostic:
    return error("lex-error", f"no token matches {text[start:end]!r}", lines.span(start, end, source))
