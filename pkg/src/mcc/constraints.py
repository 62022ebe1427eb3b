"""Lowering mapping documents to canonical constraint sets.

Property-like definitions (``E.m[kind]: value``) become entries directly.
Grammar-like definitions (``E: "(" m ")"``) are taken apart into delimiter,
separator, multiplicity and member-order constraints, and multiplicities
are checked against the model rather than stored when they agree with it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

from .asm import ElementDef, ElementKind, MemberDef, Model, PathError, resolve_path
from .diagnostics import NO_SPAN, Diagnostic, Span, error, info, warning
from .dsl import (
    AlternationSpec, BooleanValue, ClosureSpec, ConstraintDefinition, ElementRef, IntegerValue,
    MappingDocument, OptionalSpec, ParenSpec, PatternLiteral, PositiveSpec, PrecedenceSpec,
    SequenceSpec, pattern_source,
)
from .kinds import DELIMITER_KINDS, UNBOUNDED, ConstraintKind, check_value
from .patterns import PatternError, check_pattern

K = ConstraintKind
Key = tuple  # (element, member or None, ConstraintKind)


@dataclass(frozen=True)
class CanonicalConstraintSet:
    entries: dict = field(default_factory=dict)
    precedes: frozenset = frozenset()
    sources: dict = field(default_factory=dict, compare=False, repr=False)

    def get(self, element: str, member: str | None, kind: ConstraintKind, default=None):
        return self.entries.get((element, member, kind), default)

    def __len__(self) -> int:
        return len(self.entries)


EMPTY = CanonicalConstraintSet()


def _sort_key(key: Key):
    element, member, kind = key
    return (element, member or "", kind.value)


def _json_value(value):
    if isinstance(value, tuple):
        return list(value)
    return value


def to_json(cset: CanonicalConstraintSet) -> str:
    """Stable, sorted serialization."""
    entries = [
        {"element": k[0], "member": k[1], "kind": k[2].value, "value": _json_value(cset.entries[k])}
        for k in sorted(cset.entries, key=_sort_key)
    ]
    precedes = [list(p) for p in sorted(cset.precedes)]
    return json.dumps({"entries": entries, "precedes": precedes}, indent=2, sort_keys=True)


def transitive_closure(pairs) -> frozenset:
    succ: dict[str, set[str]] = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    closed = set()
    for start in list(succ):
        stack = list(succ[start])
        seen = set()
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            closed.add((start, node))
            stack.extend(succ.get(node, ()))
    return frozenset(closed)


def find_cycle(pairs) -> list[str] | None:
    succ: dict[str, list[str]] = {}
    for a, b in sorted(pairs):
        succ.setdefault(a, []).append(b)
    state: dict[str, int] = {}
    path: list[str] = []

    def visit(node):
        state[node] = 1
        path.append(node)
        for nxt in succ.get(node, ()):
            if state.get(nxt) == 1:
                return path[path.index(nxt):] + [nxt]
            if nxt not in state:
                found = visit(nxt)
                if found:
                    return found
        path.pop()
        state[node] = 2
        return None

    for node in sorted(succ):
        if node not in state:
            found = visit(node)
            if found:
                return found
    return None


def _cycle_diagnostic(cycle: list[str], location: Span = NO_SPAN) -> Diagnostic:
    return error("precedes-cycle", "precedes relation has a cycle: " + " < ".join(cycle), location)


# --- lowering ----------------------------------------------------------------

@dataclass
class _Lit:
    values: tuple[str, ...]


@dataclass
class _Mem:
    name: str
    low: int
    high: int | str
    separator: tuple[str, ...] | None = None


@dataclass
class _Group:
    low: int
    high: int | str
    nodes: list


_POSTFIX_MULT = {ClosureSpec: (0, UNBOUNDED), OptionalSpec: (0, 1), PositiveSpec: (1, UNBOUNDED)}


def _mul(a, b):
    if a == 0 or b == 0:
        return 0
    if a == UNBOUNDED or b == UNBOUNDED:
        return UNBOUNDED
    return a * b


def _add(a, b):
    if a == UNBOUNDED or b == UNBOUNDED:
        return UNBOUNDED
    return a + b


def _unparen(spec):
    while isinstance(spec, ParenSpec):
        spec = spec.inner
    return spec


def _literal_values(spec) -> tuple[str, ...] | None:
    spec = _unparen(spec)
    if isinstance(spec, PatternLiteral):
        return (spec.text,)
    if isinstance(spec, AlternationSpec):
        out = []
        for branch in spec.branches:
            values = _literal_values(branch)
            if values is None:
                return None
            out.extend(values)
        return tuple(out)
    return None


def _ref_name(spec) -> str | None:
    if isinstance(spec, ElementRef) and len(spec.path.segments) == 1:
        return spec.path.segments[0]
    return None


class _Lowerer:
    def __init__(self, model: Model, source_name: str):
        self.model = model
        self.source_name = source_name
        self.entries: dict = {}
        self.sources: dict = {}
        self.pairs: set = set()
        self.diags: list[Diagnostic] = []

    # bookkeeping

    def put(self, key: Key, value, span: Span) -> None:
        problem = check_value(key[2], value)
        if problem:
            self.diags.append(error("bad-value", problem, span))
            return
        if key in self.entries:
            prior = self.sources.get(key, NO_SPAN)
            self.diags.append(warning("duplicate-constraint",
                                      f"{_describe(key)} redefined; the later definition wins", span, prior))
        self.entries[key] = value
        self.sources[key] = span

    def result(self) -> CanonicalConstraintSet:
        closed = transitive_closure(self.pairs)
        cycle = find_cycle(self.pairs)
        if cycle:
            self.diags.append(_cycle_diagnostic(cycle))
        return CanonicalConstraintSet(dict(self.entries), closed, dict(self.sources))

    # dispatch

    def definition(self, d: ConstraintDefinition) -> None:
        span = d.span
        try:
            target = resolve_path(self.model, d.target)
        except PathError as exc:
            self.diags.append(error("nested-path", f"{d.target}: {exc}", span))
            return
        if target.missing:
            if target.prefix is None:
                msg = f"unknown element {d.target.segments[0]}; constraint ignored"
            else:
                msg = f"unknown member {d.target}; constraint ignored"
            self.diags.append(warning("unknown-target", msg, span))
            return
        elem = self.model.element(target.element)
        member = None if target.value_slot else target.member
        if d.constraint_id is not None:
            kind = ConstraintKind.from_keyword(d.constraint_id)
            if kind is None:
                self.diags.append(error("unknown-constraint-id", f"unknown constraint id [{d.constraint_id}]", span))
                return
            self.property_like(d, elem, member, target.value_slot, kind)
        elif target.value_slot or elem.kind is ElementKind.TOKEN:
            self.pattern(d, elem, span)
        elif member is not None:
            self.diags.append(warning("unsupported-definition",
                                      f"{d.target}: member-level grammar-like definitions are not supported; ignored",
                                      span))
        elif elem.kind is ElementKind.ALTERNATIVE:
            self.alternative(d, elem)
        else:
            self.composite(d, elem)

    def pattern(self, d: ConstraintDefinition, elem: ElementDef, span: Span) -> None:
        spec = d.constraint
        if not isinstance(spec, PatternLiteral):
            self.diags.append(error("bad-value", f"{d.target}: a token definition needs a quoted pattern", span))
            return
        self.put((elem.name, None, K.PATTERN), pattern_source(spec.raw), span)

    def property_like(self, d, elem: ElementDef, member: str | None, value_slot: bool, kind) -> None:
        span = d.span
        spec = d.constraint
        if kind is K.PRECEDES:
            if member is not None:
                self.diags.append(error("precedes-on-member",
                                        f"{d.target}: [precedes] applies to elements, not members", span))
                return
            names = self.element_names(spec, span)
            for name in names or ():
                self.pairs.add((elem.name, name))
            return
        if kind is K.PATTERN:
            self.pattern(d, elem, span)
            return
        if kind in DELIMITER_KINDS:
            values = _literal_values(spec) if spec is not None else None
            if values is None:
                self.diags.append(error("delimiter-not-literal",
                                        f"{d.target}[{kind.keyword}] expects quoted literals", span))
                return
            if kind is K.SEPARATOR and member is None:
                self.diags.append(error("bad-target", f"{d.target}: separators apply to members", span))
                return
            self.put((elem.name, member, kind), values, span)
            return
        if kind is K.VALUE:
            name = _ref_name(spec)
            if name is None:
                self.diags.append(error("bad-value", f"{d.target}[value] expects a member name", span))
                return
            self.put((elem.name, None, kind), name, span)
            return
        if kind in (K.ASSOCIATIVITY, K.COMPOSITION, K.PRIORITY):
            if member is not None or value_slot:
                self.diags.append(error("bad-target", f"{d.target}: [{kind.keyword}] applies to elements", span))
                return
            if kind is K.PRIORITY:
                value = spec.value if isinstance(spec, IntegerValue) else None
            else:
                value = _ref_name(spec)
            self.put((elem.name, None, kind), value, span)
            return
        # multiplicity and id/reference markers: assertions against the model
        mdef = elem.member(member) if member else None
        if mdef is None:
            self.diags.append(error("bad-target", f"{d.target}: [{kind.keyword}] applies to members", span))
            return
        if kind in (K.OPTIONAL, K.ID, K.REFERENCE):
            if spec is None:
                value = True
            elif isinstance(spec, BooleanValue):
                value = spec.value
            else:
                self.diags.append(error("bad-value", f"{d.target}[{kind.keyword}] expects true or false", span))
                return
            actual = {K.OPTIONAL: mdef.optional, K.ID: mdef.is_id, K.REFERENCE: mdef.is_reference}[kind]
        else:
            if not isinstance(spec, IntegerValue):
                self.diags.append(error("bad-value", f"{d.target}[{kind.keyword}] expects an integer", span))
                return
            value = spec.value
            actual = mdef.min if kind is K.MINIMUM else mdef.max
        if value != actual:
            self.put((elem.name, member, kind), value, span)

    def element_names(self, spec, span: Span) -> list[str] | None:
        spec = _unparen(spec)
        if isinstance(spec, (SequenceSpec, AlternationSpec)):
            parts = spec.items if isinstance(spec, SequenceSpec) else spec.branches
        else:
            parts = (spec,)
        names = []
        for part in parts:
            name = _ref_name(_unparen(part))
            if name is None:
                self.diags.append(error("bad-value", "expected element names", span))
                return None
            if name not in self.model:
                self.diags.append(warning("unknown-target", f"unknown element {name}; ignored", span))
                continue
            names.append(name)
        return names

    # alternatives

    def alternative(self, d: ConstraintDefinition, elem: ElementDef) -> None:
        spec = _unparen(d.constraint)
        span = d.span
        if isinstance(spec, PrecedenceSpec):
            groups = [self.element_names(link, span) or [] for link in spec.links]
            for i, j in combinations(range(len(groups)), 2):
                for a in groups[i]:
                    for b in groups[j]:
                        self.pairs.add((a, b))
            return
        names = self.element_names(spec, span)
        if names is None:
            return
        if set(names) != set(elem.variants):
            self.diags.append(error("variant-mismatch",
                                    f"{elem.name}: mapping lists variants {sorted(names)}, "
                                    f"model declares {sorted(elem.variants)}", span))

    # composites

    def composite(self, d: ConstraintDefinition, elem: ElementDef) -> None:
        spec = d.constraint
        items = spec.items if isinstance(spec, SequenceSpec) else (spec,)
        nodes = self.level(list(items), elem, d.span)
        if nodes is None:
            return
        occurrences: dict[str, list[_Mem]] = {}
        order: list[str] = []
        self.collect(nodes, (1, 1), occurrences, order)
        complete = set(occurrences) == {m.name for m in elem.members}
        self.assign(nodes, elem, "complete" if complete else "partial", d.span)
        for name, occs in occurrences.items():
            mdef = elem.member(name)
            low, high = occs[0].low, occs[0].high
            for occ in occs[1:]:
                low, high = _add(low, occ.low), _add(high, occ.high)
            # a bare reference in a partial definition only places delimiters
            if complete or (low, high) != (1, 1):
                self.check_shape(elem, mdef, low, high, d.span)
            seps = [o.separator for o in occs if o.separator]
            if seps:
                self.put((elem.name, name, K.SEPARATOR), seps[-1], d.span)
        declared = [m.name for m in elem.members]
        if complete and order != declared:
            self.put((elem.name, None, K.MEMBER_ORDER), tuple(order), d.span)

    def check_shape(self, elem: ElementDef, mdef: MemberDef, low, high, span: Span) -> None:
        implied_optional = low == 0
        implied_repeats = high == UNBOUNDED or high > 1
        if implied_optional != mdef.optional:
            self.put((elem.name, mdef.name, K.OPTIONAL), implied_optional, span)
        if implied_repeats != mdef.repeats:
            self.put((elem.name, mdef.name, K.MAXIMUM), high, span)

    def level(self, items: list, elem: ElementDef, span: Span) -> list | None:
        nodes = []
        i = 0
        while i < len(items):
            item = items[i]
            name = _ref_name(item)
            if name is not None and i + 1 < len(items):
                sep = self.list_idiom(name, items[i + 1])
                if sep is not None:
                    if elem.member(name) is None:
                        self.diags.append(warning("unknown-target",
                                                  f"unknown member {elem.name}.{name}; ignored", span))
                    else:
                        low = 2 if isinstance(items[i + 1], PositiveSpec) else 1
                        nodes.append(_Mem(name, low, UNBOUNDED, sep))
                    i += 2
                    continue
            node = self.convert(item, elem, span)
            if node is False:
                return None
            if node is not None:
                nodes.append(node)
            i += 1
        return nodes

    def list_idiom(self, name: str, follower) -> tuple[str, ...] | None:
        """Recognize ``m (SEP m)*`` given ``m`` and the item after it."""
        if not isinstance(follower, (ClosureSpec, PositiveSpec)):
            return None
        inner = _unparen(follower.inner)
        if not isinstance(inner, SequenceSpec) or len(inner.items) != 2:
            return None
        sep = _literal_values(inner.items[0])
        if sep is None or _ref_name(inner.items[1]) != name:
            return None
        return sep

    def convert(self, item, elem: ElementDef, span: Span):
        values = _literal_values(item) if not isinstance(item, ParenSpec) else None
        if values is not None:
            return _Lit(values)
        name = _ref_name(item)
        if name is not None:
            if elem.member(name) is None:
                self.diags.append(warning("unknown-target", f"unknown member {elem.name}.{name}; ignored", span))
                return None
            return _Mem(name, 1, 1)
        if isinstance(item, tuple(_POSTFIX_MULT)):
            low, high = _POSTFIX_MULT[type(item)]
            inner = _unparen(item.inner)
            name = _ref_name(inner)
            if name is not None:
                if elem.member(name) is None:
                    self.diags.append(warning("unknown-target",
                                              f"unknown member {elem.name}.{name}; ignored", span))
                    return None
                return _Mem(name, low, high)
            sub = inner.items if isinstance(inner, SequenceSpec) else (inner,)
            nodes = self.level(list(sub), elem, span)
            return False if nodes is None else _Group(low, high, nodes)
        if isinstance(item, ParenSpec):
            inner = item.inner
            sub = inner.items if isinstance(inner, SequenceSpec) else (inner,)
            nodes = self.level(list(sub), elem, span)
            return False if nodes is None else _Group(1, 1, nodes)
        self.diags.append(error("unsupported-definition",
                                f"{elem.name}: unsupported construct in grammar-like definition", span))
        return False

    def collect(self, nodes, mult, occurrences, order) -> None:
        for node in nodes:
            if isinstance(node, _Mem):
                occ = _Mem(node.name, _mul(node.low, mult[0]), _mul(node.high, mult[1]), node.separator)
                occurrences.setdefault(node.name, []).append(occ)
                if node.name not in order:
                    order.append(node.name)
            elif isinstance(node, _Group):
                self.collect(node.nodes, (_mul(node.low, mult[0]), _mul(node.high, mult[1])), occurrences, order)

    def assign(self, nodes, elem: ElementDef, context: str, span: Span) -> None:
        taken: set = set()

        def first_member(node):
            if isinstance(node, _Mem):
                return node.name
            for sub in node.nodes:
                if not isinstance(sub, _Lit):
                    return first_member(sub)
            return None

        def last_member(node):
            if isinstance(node, _Mem):
                return node.name
            for sub in reversed(node.nodes):
                if not isinstance(sub, _Lit):
                    return last_member(sub)
            return None

        for i, node in enumerate(nodes):
            if isinstance(node, _Group):
                self.assign(node.nodes, elem, "group", span)
                continue
            if not isinstance(node, _Lit):
                continue
            before = [n for n in nodes[:i] if not isinstance(n, _Lit)]
            after = [n for n in nodes[i + 1:] if not isinstance(n, _Lit)]
            prev = before[-1] if before else None
            nxt = after[0] if after else None
            if nxt is None and prev is None:
                key = (elem.name, None, K.PREFIX)
            elif nxt is None:
                key = (elem.name, None, K.SUFFIX) if context == "complete" else (elem.name, last_member(prev), K.SUFFIX)
            elif prev is None:
                key = (elem.name, None, K.PREFIX) if context == "complete" else (elem.name, first_member(nxt), K.PREFIX)
            elif isinstance(nxt, _Mem):
                key = (elem.name, nxt.name, K.PREFIX)
            elif isinstance(prev, _Mem):
                key = (elem.name, prev.name, K.SUFFIX)
            else:
                key = (elem.name, first_member(nxt), K.PREFIX)
            if key in taken:
                self.diags.append(error("adjacent-literals",
                                        f"{elem.name}: adjacent literals compete for {_describe(key)}", span))
                continue
            taken.add(key)
            self.put(key, node.values, span)


def _describe(key: Key) -> str:
    element, member, kind = key
    target = element if member is None else f"{element}.{member}"
    return f"{kind.value}({target})"


def lower(doc: MappingDocument, model: Model) -> tuple[CanonicalConstraintSet, list[Diagnostic]]:
    lowerer = _Lowerer(model, doc.source_name)
    for definition in doc.definitions:
        lowerer.definition(definition)
    result = lowerer.result()
    return result, lowerer.diags


def defaults_from_model(model: Model) -> CanonicalConstraintSet:
    """Constraints carried by the model's inline annotations."""
    entries: dict = {}
    sources: dict = {}
    for elem in model.elements:
        for ann in elem.default_constraints:
            member = ann.member
            if ann.kind is K.PATTERN and elem.kind is ElementKind.TOKEN:
                member = None
            key = (elem.name, member, ann.kind)
            entries[key] = ann.value
            sources[key] = ann.span
    return CanonicalConstraintSet(entries, frozenset(), sources)


def merge(defaults: CanonicalConstraintSet, overrides=()) -> tuple[CanonicalConstraintSet, list[Diagnostic]]:
    """Overlay ``overrides`` on ``defaults`` key by key, later sets winning."""
    entries = dict(defaults.entries)
    sources = dict(defaults.sources)
    pairs = set(defaults.precedes)
    for layer in overrides:
        entries.update(layer.entries)
        sources.update(layer.sources)
        pairs |= layer.precedes
    diags = []
    cycle = find_cycle(pairs)
    if cycle:
        diags.append(_cycle_diagnostic(cycle))
    return CanonicalConstraintSet(entries, transitive_closure(pairs), sources), diags


def check_consistency(cset: CanonicalConstraintSet, model: Model) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for key in sorted(cset.entries, key=_sort_key):
        value = cset.entries[key]
        element, member, kind = key
        span = cset.sources.get(key, NO_SPAN)
        problem = check_value(kind, value)
        if problem:
            diags.append(error("bad-value", f"{_describe(key)}: {problem}", span))
            continue
        elem = model.element(element)
        if elem is None:
            diags.append(warning("unknown-target", f"{_describe(key)} names unknown element {element}", span))
            continue
        mdef = elem.member(member) if member else None
        if member is not None and mdef is None and not (elem.kind is ElementKind.TOKEN and member == elem.value_name):
            diags.append(warning("unknown-target", f"{_describe(key)} names unknown member", span))
            continue
        where = f"{element}.{member}" if member else element
        if kind is K.OPTIONAL and mdef is not None and value != mdef.optional:
            state = "optional" if value else "mandatory"
            diags.append(error("multiplicity-conflict",
                               f"mapping makes {where} {state}, the model declares "
                               f"{{{mdef.min},{mdef.max}}}", span))
        elif kind is K.MINIMUM and mdef is not None and value != mdef.min:
            diags.append(error("multiplicity-conflict",
                               f"mapping sets minimum {value} on {where}, the model declares {mdef.min}", span))
        elif kind is K.MAXIMUM and mdef is not None and value != mdef.max:
            diags.append(error("multiplicity-conflict",
                               f"mapping sets maximum {value} on {where}, the model declares {mdef.max}", span))
        elif kind in (K.ID, K.REFERENCE) and mdef is not None:
            actual = mdef.is_id if kind is K.ID else mdef.is_reference
            if value != actual:
                diags.append(error("marker-conflict", f"{_describe(key)}={value} contradicts the model", span))
        elif kind is K.SEPARATOR and (mdef is None or not mdef.repeats):
            diags.append(warning("separator-on-single", f"separator on non-repeating {where}", span))
        elif kind is K.PATTERN:
            if elem.kind is not ElementKind.TOKEN:
                diags.append(error("pattern-on-nontoken", f"pattern on non-token element {element}", span))
            else:
                try:
                    check_pattern(value)
                except PatternError as exc:
                    diags.append(error("bad-pattern", f"{element}: {exc}", span))
        elif kind is K.ASSOCIATIVITY and not model.self_nesting(element):
            diags.append(warning("associativity-not-self-nesting",
                                 f"associativity on {element}, which never nests in itself", span))
        elif kind is K.MEMBER_ORDER:
            if set(value) != {m.name for m in elem.members}:
                diags.append(error("member-order", f"member order {list(value)} does not cover {element}", span))
            else:
                diags.append(info("member-order",
                                  f"{element} members appear in order {list(value)}, not declaration order", span))
    for a, b in sorted(cset.precedes):
        for name in (a, b):
            if name not in model:
                diags.append(warning("unknown-target", f"precedes names unknown element {name}"))
    cycle = find_cycle(cset.precedes)
    if cycle:
        diags.append(_cycle_diagnostic(cycle))
    return diags


def _normalize(kind: ConstraintKind, value):
    if kind in DELIMITER_KINDS:
        return tuple(sorted(set(value)))
    return value


def canonicalize(cset: CanonicalConstraintSet) -> CanonicalConstraintSet:
    entries = {key: _normalize(key[2], value) for key, value in cset.entries.items()}
    return CanonicalConstraintSet(entries, transitive_closure(cset.precedes), dict(cset.sources))


def equivalent(a: CanonicalConstraintSet, b: CanonicalConstraintSet) -> bool:
    a, b = canonicalize(a), canonicalize(b)
    return a.entries == b.entries and a.precedes == b.precedes


def difference(a: CanonicalConstraintSet, b: CanonicalConstraintSet) -> list[str]:
    """Human-readable keys where two sets disagree."""
    a, b = canonicalize(a), canonicalize(b)
    out = []
    for key in sorted(set(a.entries) | set(b.entries), key=_sort_key):
        if a.entries.get(key, None) != b.entries.get(key, None):
            out.append(f"{_describe(key)}: {a.entries.get(key)!r} != {b.entries.get(key)!r}")
    for pair in sorted(a.precedes ^ b.precedes):
        out.append(f"precedes{pair}: only in {'first' if pair in a.precedes else 'second'}")
    return out


def priority_pairs(model: Model, cset: CanonicalConstraintSet) -> set:
    """Precedes pairs implied by Priority integers among sibling variants (lower binds tighter)."""
    pairs = set()
    for elem in model.elements:
        if elem.kind is not ElementKind.ALTERNATIVE:
            continue
        ranked = [(cset.get(v, None, K.PRIORITY), v) for v in elem.variants]
        ranked = [(p, v) for p, v in ranked if p is not None]
        for (p1, v1), (p2, v2) in combinations(ranked, 2):
            if p1 < p2:
                pairs.add((v1, v2))
            elif p2 < p1:
                pairs.add((v2, v1))
    return pairs
