"""Choosing one tree from a parse forest.

Each node is resolved bottom-up.  Its candidate derivations pass through
three filters in turn (precedence, associativity, composition); a filter
that would remove every candidate is skipped.  Whatever ambiguity remains,
or a non-associative nesting that could not be avoided, is reported only if
the node ends up in the chosen tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..csm import Grammar
from ..diagnostics import Diagnostic, Span, error
from .forest import Derivation, Key, ParseForest

HELPER_KINDS = ("list", "opt", "delimiter")


@dataclass
class Tree:
    key: Key
    prod: int | None = None           # None for token leaves
    children: tuple["Tree", ...] = ()
    text: str | None = None           # token text for leaves

    @property
    def symbol(self) -> str:
        return self.key[0]


@dataclass
class _View:
    deriv: Derivation
    top: str | None        # element constructed here (None for helper nodes)
    owner: str             # element whose constraints govern this node
    items: list[Key]       # member-carrying children, helpers expanded
    flat: list[Key]        # all children, helpers expanded


@dataclass
class _Choice:
    view: _View
    survivors: tuple = ()
    violation: bool = False

    @property
    def remaining(self) -> int:
        return len(self.survivors)


@dataclass
class Selection:
    tree: Tree | None
    diagnostics: list[Diagnostic] = field(default_factory=list)


class _Resolver:
    def __init__(self, forest: ParseForest):
        self.forest = forest
        self.grammar: Grammar = forest.grammar
        self.prods = self.grammar.productions
        d = self.grammar.disambiguation
        self.precedes = d.precedes
        self.assoc = d.associativity
        self.comp = d.composition
        self.priority = d.priority
        self.choice: dict[Key, _Choice] = {}

    # --- views ---------------------------------------------------------------

    def top_of(self, key: Key) -> str | None:
        if self.forest.is_token(key):
            return key[0]
        return self.choice[key].view.top

    def is_helper(self, key: Key) -> bool:
        if self.forest.is_token(key):
            return False
        return self.prods[self.choice[key].view.deriv.prod].provenance.kind in HELPER_KINDS

    def view(self, d: Derivation) -> _View:
        prod = self.prods[d.prod]
        prov = prod.provenance
        if prov.kind == "variant":
            child = next(c for c, r in zip(d.children, prod.roles) if r == "variant")
            if self.forest.is_token(child):
                return _View(d, child[0], child[0], [], list(d.children))
            inner = self.choice[child].view
            return _View(d, inner.top, inner.owner, inner.items, list(d.children))
        items: list[Key] = []
        flat: list[Key] = []
        for child, role in zip(d.children, prod.roles):
            if self.is_helper(child):
                sub = self.choice[child].view
                flat.extend(sub.flat)
                if role is not None:
                    items.extend(sub.items)
            else:
                flat.append(child)
                if role is not None:
                    items.append(child)
        top = prov.element if prov.kind == "element" else None
        return _View(d, top, prov.element, items, flat)

    # --- filters -------------------------------------------------------------

    def same_level(self, owner: str, child: str | None) -> bool:
        if child is None:
            return False
        if child == owner:
            return True
        level = self.priority.get(owner)
        return level is not None and self.priority.get(child) == level

    def precedence(self, views: list[_View]) -> list[_View]:
        tops = {v.top for v in views if v.top is not None}
        if len(tops) > 1:
            views = _keep(views, lambda v: not any((v.top, t) in self.precedes for t in tops if t != v.top))
        return _keep(views, lambda v: not any((v.owner, self.top_of(c)) in self.precedes for c in v.items))

    def associativity(self, views: list[_View]) -> tuple[list[_View], bool]:
        def nested(v: _View) -> bool:
            mode = self.assoc.get(v.owner)
            if mode is None or not v.items:
                return False
            if mode == "left":
                return self.same_level(v.owner, self.top_of(v.items[-1]))
            if mode == "right":
                return self.same_level(v.owner, self.top_of(v.items[0]))
            return any(self.same_level(v.owner, self.top_of(c)) for c in v.items)

        kept = [v for v in views if not nested(v)]
        if kept:
            return kept, False
        violation = any(self.assoc.get(v.owner) == "non" for v in views)
        return views, violation

    def composition(self, views: list[_View]) -> list[_View]:
        if len(views) < 2:
            return views
        beaten: set[int] = set()
        for a in range(len(views)):
            for b in range(len(views)):
                if a != b and b not in beaten and self.beats(views[a], views[b]):
                    beaten.add(b)
        return [v for i, v in enumerate(views) if i not in beaten] or views

    def beats(self, a: _View, b: _View) -> bool:
        for x, y in zip(a.flat, b.flat):
            if x == y:
                continue
            policy = self.comp.get(a.owner) or self.comp.get(x[0]) or self.comp.get(y[0])
            if policy == "eager":
                return x[2] > y[2]
            if policy == "lazy":
                return x[2] < y[2]
            return False
        return False

    # --- driver --------------------------------------------------------------

    def resolve(self, key: Key) -> None:
        views = [self.view(d) for d in self.forest.nodes[key]
                 if all(self.forest.is_token(c) or c in self.choice for c in d.children)]
        if not views:
            return
        views = self.precedence(views)
        views, violation = self.associativity(views)
        views = self.composition(views)
        self.choice[key] = _Choice(views[0], tuple(views), violation)

    def run(self) -> None:
        nodes = self.forest.nodes
        state: dict[Key, int] = {}
        stack: list[tuple[Key, bool]] = [(self.forest.root, False)]
        while stack:
            key, leaving = stack.pop()
            if leaving:
                self.resolve(key)
                state[key] = 2
                continue
            if state.get(key):
                continue
            state[key] = 1
            stack.append((key, True))
            for d in nodes[key]:
                for c in d.children:
                    if c in nodes and not state.get(c):
                        stack.append((c, False))


def _keep(views, predicate):
    kept = [v for v in views if predicate(v)]
    return kept or views


def select(forest: ParseForest, source: str = "") -> Selection:
    if forest.is_token(forest.root):
        return Selection(Tree(forest.root, None, (), forest.token(forest.root).text), [])
    resolver = _Resolver(forest)
    resolver.run()
    if forest.root not in resolver.choice:
        return Selection(None, [error("no-tree", "every derivation of the input is cyclic")])
    diags: list[Diagnostic] = []
    tokens = forest.tokens

    def span(key: Key) -> Span:
        _, i, j = key
        if not tokens:
            return Span(1, 1, 1, 1, source)
        first = tokens[min(i, len(tokens) - 1)]
        last = tokens[max(min(j, len(tokens)) - 1, 0)]
        return Span(first.line, first.column, last.line, last.column + len(last.text), source)

    def build(key: Key) -> Tree:
        if forest.is_token(key):
            return Tree(key, None, (), tokens[key[1]].text)
        ch = resolver.choice[key]
        if ch.remaining > 1:
            readings = "; ".join(_describe(resolver.prods[v.deriv.prod], v.deriv) for v in ch.survivors)
            diags.append(error("ambiguous", f"{ch.remaining} readings of {key[0]} remain after "
                                            f"disambiguation: {readings}", span(key)))
        if ch.violation:
            diags.append(error("non-associative", f"{ch.view.owner} is non-associative but nests here",
                               span(key)))
        d = ch.view.deriv
        return Tree(key, d.prod, tuple(build(c) for c in d.children))

    tree = _with_deep_recursion(forest.root, build)
    return Selection(tree, diags)


def _describe(prod, deriv) -> str:
    parts = [f"{sym}[{c[1]}:{c[2]}]" for sym, c in zip(prod.rhs, deriv.children)]
    return f"{prod.lhs} ::= {' '.join(parts) or 'ε'}"


def disambiguate(forest: ParseForest, grammar: Grammar | None = None) -> tuple[Tree | None, list[Diagnostic]]:
    """The single tree chosen from ``forest`` and the diagnostics raised on the way."""
    if grammar is not None and grammar is not forest.grammar:
        forest = ParseForest(grammar, forest.tokens, forest.root, forest.nodes)
    selection = select(forest)
    return selection.tree, selection.diagnostics


def _with_deep_recursion(root, build):
    import sys
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20000))
    try:
        return build(root)
    finally:
        sys.setrecursionlimit(limit)
