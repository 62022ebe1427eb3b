"""Integer tables for the recognizer.

Terminals get ids ``0..T-1`` and nonterminals ``T..S-1``.  Production
``P`` (the last one) is the augmented start ``$start ::= start``.  A dotted
item is a single integer: ``prod_start[p] + dot``.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass

from ..csm import Grammar

AUGMENTED = "$start"


@dataclass
class Tables:
    symbols: list[str]
    ids: dict[str, int]
    n_terminals: int
    prod_lhs: array
    prod_start: array       # offset of production p in the dotted-item space
    prod_len: array
    dot_sym: array          # symbol after the dot, -1 when complete
    dot_prod: array
    lhs_start: array        # prods of nonterminal s: lhs_prods[lhs_start[s]:lhs_start[s+1]]
    lhs_prods: array
    nullable: array
    start_prod: int

    def encode(self, kinds) -> array:
        return array("i", (self.ids[k] for k in kinds))


def build_tables(grammar: Grammar, start: str | None = None) -> Tables:
    start = start or grammar.start
    terminals = [t.name for t in grammar.tokens]
    nonterminals: list[str] = []
    seen = set(terminals)
    for p in grammar.productions:
        for sym in (p.lhs, *p.rhs):
            if sym not in seen:
                seen.add(sym)
                nonterminals.append(sym)
    if start not in seen:
        nonterminals.append(start)
    nonterminals.append(AUGMENTED)
    symbols = terminals + nonterminals
    ids = {s: i for i, s in enumerate(symbols)}

    rules = [(ids[p.lhs], [ids[s] for s in p.rhs]) for p in grammar.productions]
    rules.append((ids[AUGMENTED], [ids[start]]))

    prod_lhs, prod_start, prod_len, dot_sym, dot_prod = (array("i") for _ in range(5))
    for p, (lhs, rhs) in enumerate(rules):
        prod_lhs.append(lhs)
        prod_start.append(len(dot_sym))
        prod_len.append(len(rhs))
        for sym in rhs:
            dot_sym.append(sym)
            dot_prod.append(p)
        dot_sym.append(-1)
        dot_prod.append(p)

    by_lhs: list[list[int]] = [[] for _ in symbols]
    for p, (lhs, _) in enumerate(rules):
        by_lhs[lhs].append(p)
    lhs_start, lhs_prods = array("i"), array("i")
    for prods in by_lhs:
        lhs_start.append(len(lhs_prods))
        lhs_prods.extend(prods)
    lhs_start.append(len(lhs_prods))

    nullable = array("b", [0] * len(symbols))
    changed = True
    while changed:
        changed = False
        for lhs, rhs in rules:
            if not nullable[lhs] and all(nullable[s] for s in rhs):
                nullable[lhs] = 1
                changed = True

    return Tables(symbols, ids, len(terminals), prod_lhs, prod_start, prod_len, dot_sym, dot_prod,
                  lhs_start, lhs_prods, nullable, len(rules) - 1)
