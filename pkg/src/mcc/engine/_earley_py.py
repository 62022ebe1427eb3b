"""Pure-Python Earley recognizer (fallback for the compiled kernel)."""

from __future__ import annotations


def recognize(t, tokens):
    """Run the recognizer over encoded ``tokens``.

    Returns ``(completed, furthest, expected)``: the set of completed
    ``(prod, start, end)`` triples, the last position whose Earley set is
    non-empty, and the symbols expected there: every terminal after a dot,
    plus nonterminals after the dot of items that have already consumed input
    (or of the start item).
    """
    n = len(tokens)
    T = t.n_terminals
    dot_sym = list(t.dot_sym)
    dot_prod = list(t.dot_prod)
    prod_lhs = list(t.prod_lhs)
    prod_start = list(t.prod_start)
    lhs_start = list(t.lhs_start)
    lhs_prods = list(t.lhs_prods)
    nullable = list(t.nullable)

    sets = [[] for _ in range(n + 1)]
    seen = [set() for _ in range(n + 1)]
    waits = [{} for _ in range(n + 1)]
    completed = set()

    def add(i, d, o):
        key = (d, o)
        if key not in seen[i]:
            seen[i].add(key)
            sets[i].append(key)

    add(0, prod_start[t.start_prod], 0)
    furthest = 0
    for i in range(n + 1):
        agenda = sets[i]
        if not agenda:
            break
        furthest = i
        predicted = set()
        here = waits[i]
        k = 0
        while k < len(agenda):
            d, o = agenda[k]
            k += 1
            s = dot_sym[d]
            if s < 0:
                p = dot_prod[d]
                completed.add((p, o, i))
                for d2, o2 in waits[o].get(prod_lhs[p], ()):
                    add(i, d2 + 1, o2)
            elif s >= T:
                here.setdefault(s, []).append((d, o))
                if s not in predicted:
                    predicted.add(s)
                    for idx in range(lhs_start[s], lhs_start[s + 1]):
                        add(i, prod_start[lhs_prods[idx]], i)
                if nullable[s]:
                    add(i, d + 1, o)
            elif i < n and tokens[i] == s:
                add(i + 1, d + 1, o)
    start_item = prod_start[t.start_prod]
    expected = set()
    for d, _ in sets[furthest]:
        s = dot_sym[d]
        if s >= 0 and (s < T or d != prod_start[dot_prod[d]] or d == start_item):
            expected.add(s)
    return completed, furthest, expected
