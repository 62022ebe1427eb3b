"""Shared packed parse forests built from recognizer output."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..csm import Grammar
from ..diagnostics import Diagnostic, Span, error
from .lexer import LineIndex, Token, lex
from .recognizer import recognize
from .tables import Tables, build_tables

Key = tuple  # (symbol, start, end); tokens are (token kind, i, i + 1)


@dataclass(frozen=True)
class Derivation:
    prod: int                 # index into grammar.productions
    children: tuple[Key, ...]


@dataclass
class ParseForest:
    grammar: Grammar
    tokens: list[Token]
    root: Key
    nodes: dict[Key, list[Derivation]] = field(default_factory=dict)

    def is_token(self, key: Key) -> bool:
        return key not in self.nodes

    def token(self, key: Key) -> Token:
        return self.tokens[key[1]]

    def count_trees(self, key: Key | None = None) -> int:
        """Number of distinct trees under ``key`` (cyclic derivations excluded)."""
        memo: dict[Key, int] = {}
        active: set[Key] = set()

        def count(k):
            if k not in self.nodes:
                return 1
            if k in memo:
                return memo[k]
            if k in active:
                return 0
            active.add(k)
            total = 0
            for d in self.nodes[k]:
                product = 1
                for c in d.children:
                    product *= count(c)
                    if not product:
                        break
                total += product
            active.discard(k)
            memo[k] = total
            return total

        return count(self.root if key is None else key)


@dataclass
class ParseResult:
    forest: ParseForest | None
    tokens: list[Token]
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.forest is not None


class Parser:
    """Reusable parser for one grammar and start symbol."""

    def __init__(self, grammar: Grammar, start: str | None = None):
        self.grammar = grammar
        self.start = start or grammar.start
        self.tables: Tables = build_tables(grammar, self.start)
        self.by_lhs: dict[str, list[int]] = {}
        for index, p in enumerate(grammar.productions):
            self.by_lhs.setdefault(p.lhs, []).append(index)

    def parse(self, text: str, source: str = "") -> ParseResult:
        tokens, diags = lex(self.grammar, text, source)
        if diags:
            return ParseResult(None, tokens, diags)
        return self.parse_tokens(tokens, text, source)

    def parse_tokens(self, tokens: list[Token], text: str = "", source: str = "") -> ParseResult:
        t = self.tables
        completed, furthest, expected = recognize(t, t.encode(tok.kind for tok in tokens))
        if (t.start_prod, 0, len(tokens)) not in completed:
            return ParseResult(None, tokens, [self._rejection(tokens, furthest, expected, text, source)])
        return ParseResult(self._forest(tokens, completed), tokens, [])

    def _rejection(self, tokens, furthest, expected, text, source) -> Diagnostic:
        names = [self.tables.symbols[s] for s in expected]
        goals = sorted(n for n in names if n in self.grammar.nonterminals and "." not in n)
        terminals = sorted(n for n in names if n in self.grammar.terminals)
        wanted = ", ".join(goals + terminals) or "end of input"
        lines = LineIndex(text)
        if furthest < len(tokens):
            tok = tokens[furthest]
            span = Span(tok.line, tok.column, tok.line, tok.column + len(tok.text), source)
            message = f"unexpected {tok.text!r} at token {furthest}; expected {wanted}"
        else:
            if tokens:
                last = tokens[-1]
                span = Span(last.line, last.column + len(last.text), last.line, last.column + len(last.text), source)
            else:
                span = lines.span(len(text), len(text), source)
            message = f"unexpected end of input at token {furthest}; expected {wanted}"
        return error("syntax-error", message, span)

    def _forest(self, tokens, completed) -> ParseForest:
        t = self.tables
        prods = self.grammar.productions
        n_user = len(prods)
        done: set[tuple[int, int, int]] = set()
        ends: dict[tuple[str, int], set[int]] = {}
        for p, i, j in completed:
            if p >= n_user:
                continue
            done.add((p, i, j))
            ends.setdefault((prods[p].lhs, i), set()).add(j)
        nonterminals = self.grammar.nonterminals

        forest = ParseForest(self.grammar, tokens, (self.start, 0, len(tokens)))
        stack = [forest.root] if self.start in nonterminals else []
        while stack:
            key = stack.pop()
            if key in forest.nodes:
                continue
            sym, i, j = key
            derivations = []
            for p in self.by_lhs.get(sym, ()):
                if (p, i, j) not in done:
                    continue
                for children in _splits(prods[p].rhs, i, j, tokens, ends, nonterminals):
                    derivations.append(Derivation(p, children))
            forest.nodes[key] = derivations
            for d in derivations:
                for c in d.children:
                    if c[0] in nonterminals and c not in forest.nodes:
                        stack.append(c)
        return forest


def _splits(rhs, i, j, tokens, ends, nonterminals):
    """All ways to cover tokens[i:j] with the symbols of ``rhs``."""
    out = []
    k = len(rhs)

    def walk(index, pos, acc):
        if index == k:
            if pos == j:
                out.append(tuple(acc))
            return
        sym = rhs[index]
        if sym in nonterminals:
            candidates = ends.get((sym, pos), ())
            if index == k - 1:
                candidates = [j] if j in candidates else []
            for end in sorted(candidates):
                if end <= j:
                    acc.append((sym, pos, end))
                    walk(index + 1, end, acc)
                    acc.pop()
        elif pos < j and tokens[pos].kind == sym:
            acc.append((sym, pos, pos + 1))
            walk(index + 1, pos + 1, acc)
            acc.pop()

    walk(0, i, [])
    return out


def parse(grammar: Grammar, input, start: str | None = None, source: str = "") -> ParseResult:
    """Parse text, or an already lexed token list, from ``start``."""
    parser = Parser(grammar, start)
    if isinstance(input, str):
        return parser.parse(input, source)
    return parser.parse_tokens(list(input), source=source)
