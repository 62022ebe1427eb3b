# cython: language_level=3, boundscheck=False, wraparound=False
# distutils: language = c++
"""Compiled Earley recognizer; same contract as the pure-Python version."""

from libcpp.vector cimport vector
from libcpp.unordered_set cimport unordered_set
from libcpp.unordered_map cimport unordered_map

ctypedef long long i64


def recognize(t, tokens):
    cdef const int[:] dot_sym = t.dot_sym
    cdef const int[:] dot_prod = t.dot_prod
    cdef const int[:] prod_lhs = t.prod_lhs
    cdef const int[:] prod_start = t.prod_start
    cdef const int[:] lhs_start = t.lhs_start
    cdef const int[:] lhs_prods = t.lhs_prods
    cdef const signed char[:] nullable = t.nullable
    cdef vector[int] toks = list(tokens)
    cdef i64 n = toks.size()
    cdef i64 T = t.n_terminals
    cdef i64 S = len(t.symbols)
    cdef i64 stride = n + 1

    cdef vector[vector[i64]] sets = vector[vector[i64]](n + 1)
    cdef vector[unordered_set[i64]] seen = vector[unordered_set[i64]](n + 1)
    # waiting items per (position, symbol), key = position * S + symbol
    cdef unordered_map[i64, vector[i64]] waits
    cdef vector[char] predicted = vector[char](S, 0)
    cdef vector[i64] done
    cdef i64 i, k, d, o, s, p, idx, item, key, furthest = 0, j, m
    cdef vector[i64]* waiting

    item = prod_start[t.start_prod] * stride
    seen[0].insert(item)
    sets[0].push_back(item)
    for i in range(n + 1):
        if sets[i].size() == 0:
            break
        furthest = i
        for s in range(S):
            predicted[s] = 0
        k = 0
        while k < <i64>sets[i].size():
            item = sets[i][k]
            k += 1
            d = item // stride
            o = item % stride
            s = dot_sym[d]
            if s < 0:
                p = dot_prod[d]
                done.push_back(p)
                done.push_back(o)
                done.push_back(i)
                key = o * S + prod_lhs[p]
                if waits.count(key):
                    waiting = &waits[key]
                    m = waiting.size()
                    for j in range(m):
                        item = (waiting[0][j] // stride + 1) * stride + waiting[0][j] % stride
                        if seen[i].insert(item).second:
                            sets[i].push_back(item)
            elif s >= T:
                waits[i * S + s].push_back(item)
                if not predicted[s]:
                    predicted[s] = 1
                    for idx in range(lhs_start[s], lhs_start[s + 1]):
                        item = prod_start[lhs_prods[idx]] * stride + i
                        if seen[i].insert(item).second:
                            sets[i].push_back(item)
                if nullable[s]:
                    item = (d + 1) * stride + o
                    if seen[i].insert(item).second:
                        sets[i].push_back(item)
            elif i < n and toks[i] == s:
                item = (d + 1) * stride + o
                if seen[i + 1].insert(item).second:
                    sets[i + 1].push_back(item)

    completed = set()
    for k in range(0, <i64>done.size(), 3):
        completed.add((done[k], done[k + 1], done[k + 2]))
    expected = set()
    cdef i64 start_item = prod_start[t.start_prod]
    for k in range(<i64>sets[furthest].size()):
        d = sets[furthest][k] // stride
        s = dot_sym[d]
        if s >= 0 and (s < T or d != prod_start[dot_prod[d]] or d == start_item):
            expected.add(s)
    return completed, furthest, expected
