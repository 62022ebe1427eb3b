"""Concrete syntax: token specifications and productions derived from a model.

Nonterminal naming: element names are used as is; helper nonterminals are
``Element.member.list`` (repetition), ``Element.member.opt`` (optional
member) and ``Element[.member].prefix|suffix|sep`` (alternatives between
several delimiter literals).  Dots never occur in element names, so the two
never collide.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .asm import ElementDef, ElementKind, MemberDef, Model
from .constraints import CanonicalConstraintSet, priority_pairs, transitive_closure
from .diagnostics import Diagnostic, error, warning
from .kinds import UNBOUNDED, ConstraintKind
from .patterns import PatternError, check_pattern, literal_pattern

K = ConstraintKind

LITERAL_PRIORITY = 1
PATTERN_PRIORITY = 0


@dataclass(frozen=True)
class TokenSpec:
    name: str
    pattern: str
    priority: int = PATTERN_PRIORITY


@dataclass(frozen=True)
class Provenance:
    kind: str  # element, variant, list, opt, delimiter
    element: str
    member: str | None = None
    reference: bool = False


@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: tuple[str, ...]
    provenance: Provenance
    roles: tuple = ()


@dataclass(frozen=True)
class Disambiguation:
    precedes: frozenset = frozenset()
    associativity: dict = field(default_factory=dict)
    composition: dict = field(default_factory=dict)
    priority: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Grammar:
    name: str
    tokens: tuple[TokenSpec, ...]
    productions: tuple[Production, ...]
    start: str
    disambiguation: Disambiguation = field(default_factory=Disambiguation)
    skip: tuple[str, ...] = ()
    value_names: dict = field(default_factory=dict)

    @property
    def terminals(self) -> set[str]:
        return {t.name for t in self.tokens}

    @property
    def nonterminals(self) -> set[str]:
        return {p.lhs for p in self.productions}


def literal_name(text: str) -> str:
    return json.dumps(text)


class _Builder:
    def __init__(self, model: Model, cset: CanonicalConstraintSet):
        self.model = model
        self.cset = cset
        self.productions: list[Production] = []
        self.literals: dict[str, None] = {}
        self.diags: list[Diagnostic] = []

    def add(self, lhs, rhs, provenance, roles=None):
        rhs = tuple(rhs)
        roles = tuple(roles) if roles is not None else (None,) * len(rhs)
        self.productions.append(Production(lhs, rhs, provenance, roles))

    def literal(self, text: str) -> str:
        self.literals.setdefault(text, None)
        return literal_name(text)

    def delimiter(self, values, name: str, element: str, member: str | None) -> list[str]:
        """Symbols for a delimiter slot (empty if none is set)."""
        if not values:
            return []
        if len(values) == 1:
            return [self.literal(values[0])]
        for v in values:
            self.add(name, [self.literal(v)], Provenance("delimiter", element, member))
        return [name]

    def member_symbol(self, elem: ElementDef, m: MemberDef) -> str:
        if not m.is_reference:
            return m.target
        tokens = []
        for concrete in self.model.concrete_elements(m.target):
            idm = self.model.id_member(concrete)
            if idm is not None and idm.target not in tokens:
                tokens.append(idm.target)
        if len(tokens) != 1:
            self.diags.append(error("reference-token",
                                    f"{elem.name}.{m.name}: referenced elements must share one identifier token",
                                    m.span))
        return tokens[0] if tokens else m.target

    def composite(self, elem: ElementDef) -> None:
        order = self.cset.get(elem.name, None, K.MEMBER_ORDER)
        members = [elem.member(n) for n in order] if order else list(elem.members)
        rhs: list[str] = []
        roles: list = []

        def extend(symbols, role=None):
            rhs.extend(symbols)
            roles.extend([role] * len(symbols))

        extend(self.delimiter(self.cset.get(elem.name, None, K.PREFIX), f"{elem.name}.prefix", elem.name, None))
        for m in members:
            core, core_roles = self.member_core(elem, m)
            if m.min == 0:
                opt = f"{elem.name}.{m.name}.opt"
                prov = Provenance("opt", elem.name, m.name, m.is_reference)
                self.add(opt, [], prov)
                self.add(opt, core, prov, core_roles)
                extend([opt], m.name)
            else:
                rhs.extend(core)
                roles.extend(core_roles)
        extend(self.delimiter(self.cset.get(elem.name, None, K.SUFFIX), f"{elem.name}.suffix", elem.name, None))
        self.add(elem.name, rhs, Provenance("element", elem.name), roles)

    def member_core(self, elem: ElementDef, m: MemberDef):
        item = self.member_symbol(elem, m)
        if m.repeats:
            symbol = self.list_nonterminal(elem, m, item)
        else:
            symbol = item
        pre = self.delimiter(self.cset.get(elem.name, m.name, K.PREFIX), f"{elem.name}.{m.name}.prefix",
                             elem.name, m.name)
        suf = self.delimiter(self.cset.get(elem.name, m.name, K.SUFFIX), f"{elem.name}.{m.name}.suffix",
                             elem.name, m.name)
        return pre + [symbol] + suf, [None] * len(pre) + [m.name] + [None] * len(suf)

    def list_nonterminal(self, elem: ElementDef, m: MemberDef, item: str) -> str:
        name = f"{elem.name}.{m.name}.list"
        sep = self.delimiter(self.cset.get(elem.name, m.name, K.SEPARATOR), f"{elem.name}.{m.name}.sep",
                             elem.name, m.name)
        prov = Provenance("list", elem.name, m.name, m.is_reference)
        low = max(m.min, 1)

        def run(count):
            rhs, roles = [item], ["item"]
            for _ in range(count - 1):
                rhs += sep + [item]
                roles += [None] * len(sep) + ["item"]
            return rhs, roles

        if m.max == UNBOUNDED:
            rhs, roles = run(low)
            self.add(name, rhs, prov, roles)
            self.add(name, [name] + sep + [item], prov, ["list"] + [None] * len(sep) + ["item"])
        else:
            for count in range(low, m.max + 1):
                rhs, roles = run(count)
                self.add(name, rhs, prov, roles)
        return name

    def alternative(self, elem: ElementDef, precedes) -> None:
        pre = self.delimiter(self.cset.get(elem.name, None, K.PREFIX), f"{elem.name}.prefix", elem.name, None)
        suf = self.delimiter(self.cset.get(elem.name, None, K.SUFFIX), f"{elem.name}.suffix", elem.name, None)
        for variant in _order_by_precedes(list(elem.variants), precedes):
            roles = [None] * len(pre) + ["variant"] + [None] * len(suf)
            self.add(elem.name, pre + [variant] + suf, Provenance("variant", elem.name), roles)


def _order_by_precedes(names: list[str], precedes) -> list[str]:
    """Stable order placing tighter-binding variants first."""
    out: list[str] = []
    remaining = list(names)
    while remaining:
        for name in remaining:
            if not any((other, name) in precedes for other in remaining if other != name):
                break
        else:
            name = remaining[0]
        out.append(name)
        remaining.remove(name)
    return out


def derive_grammar(model: Model, cset: CanonicalConstraintSet, start: str | None = None) -> tuple[Grammar, list[Diagnostic]]:
    builder = _Builder(model, cset)
    diags = builder.diags
    precedes = transitive_closure(set(cset.precedes) | priority_pairs(model, cset))

    tokens: list[TokenSpec] = []
    value_names = {}
    for elem in model.elements:
        if elem.kind is not ElementKind.TOKEN:
            continue
        value_names[elem.name] = cset.get(elem.name, None, K.VALUE) or elem.value_name
        pattern = cset.get(elem.name, None, K.PATTERN)
        if pattern is None:
            diags.append(error("missing-pattern", f"token {elem.name} has no pattern", elem.span))
            continue
        try:
            check_pattern(pattern)
        except PatternError as exc:
            diags.append(error("bad-pattern", f"token {elem.name}: {exc}", elem.span))
            continue
        for kind in (K.PREFIX, K.SUFFIX):
            if cset.get(elem.name, None, kind):
                diags.append(warning("token-delimiter", f"{kind.value} on token {elem.name} ignored", elem.span))
        tokens.append(TokenSpec(elem.name, pattern, PATTERN_PRIORITY))

    for elem in model.elements:
        if elem.kind is ElementKind.COMPOSITE:
            builder.composite(elem)
        elif elem.kind is ElementKind.ALTERNATIVE:
            builder.alternative(elem, precedes)

    for text in builder.literals:
        tokens.append(TokenSpec(literal_name(text), literal_pattern(text), LITERAL_PRIORITY))

    if start is None:
        start = model.elements[0].name if model.elements else ""
    if start not in model:
        diags.append(error("unknown-start", f"start element {start!r} is not declared"))

    reachable = _reachable(builder.productions, start)
    for elem in model.elements:
        if elem.name not in reachable:
            diags.append(warning("unreachable-element", f"element {elem.name} is unreachable from {start}", elem.span))

    disamb = Disambiguation(
        precedes=precedes,
        associativity=_element_values(cset, K.ASSOCIATIVITY),
        composition=_element_values(cset, K.COMPOSITION),
        priority=_element_values(cset, K.PRIORITY),
    )
    grammar = Grammar(model.name, tuple(tokens), tuple(builder.productions), start, disamb,
                      tuple(model.skip_patterns), value_names)
    return grammar, diags


def _element_values(cset: CanonicalConstraintSet, kind) -> dict:
    return {k[0]: v for k, v in sorted(cset.entries.items(), key=lambda kv: kv[0][0])
            if k[2] is kind and k[1] is None}


def _reachable(productions, start: str) -> set[str]:
    by_lhs: dict[str, list[Production]] = {}
    for p in productions:
        by_lhs.setdefault(p.lhs, []).append(p)
    seen = {start}
    stack = [start]
    while stack:
        for p in by_lhs.get(stack.pop(), ()):
            for sym in p.rhs:
                if sym not in seen:
                    seen.add(sym)
                    stack.append(sym)
    return seen


# --- export ------------------------------------------------------------------

def grammar_to_dict(grammar: Grammar) -> dict:
    d = grammar.disambiguation
    return {
        "name": grammar.name,
        "start": grammar.start,
        "skip": list(grammar.skip),
        "tokens": [{"name": t.name, "pattern": t.pattern, "priority": t.priority} for t in grammar.tokens],
        "productions": [
            {
                "lhs": p.lhs,
                "rhs": list(p.rhs),
                "roles": list(p.roles),
                "provenance": {
                    "kind": p.provenance.kind,
                    "element": p.provenance.element,
                    "member": p.provenance.member,
                    "reference": p.provenance.reference,
                },
            }
            for p in grammar.productions
        ],
        "disambiguation": {
            "precedes": [list(pair) for pair in sorted(d.precedes)],
            "associativity": dict(sorted(d.associativity.items())),
            "composition": dict(sorted(d.composition.items())),
            "priority": dict(sorted(d.priority.items())),
        },
        "value_names": dict(sorted(grammar.value_names.items())),
    }


def grammar_from_dict(data: dict) -> Grammar:
    d = data.get("disambiguation", {})
    return Grammar(
        name=data.get("name", ""),
        tokens=tuple(TokenSpec(t["name"], t["pattern"], t["priority"]) for t in data["tokens"]),
        productions=tuple(
            Production(p["lhs"], tuple(p["rhs"]),
                       Provenance(p["provenance"]["kind"], p["provenance"]["element"],
                                  p["provenance"].get("member"), p["provenance"].get("reference", False)),
                       tuple(p.get("roles") or (None,) * len(p["rhs"])))
            for p in data["productions"]
        ),
        start=data["start"],
        disambiguation=Disambiguation(
            frozenset(tuple(x) for x in d.get("precedes", ())),
            dict(d.get("associativity", {})), dict(d.get("composition", {})), dict(d.get("priority", {})),
        ),
        skip=tuple(data.get("skip", ())),
        value_names=dict(data.get("value_names", {})),
    )


def _ebnf_comment(grammar: Grammar, element: str) -> str:
    d = grammar.disambiguation
    notes = []
    for label, table in (("associativity", d.associativity), ("composition", d.composition),
                         ("priority", d.priority)):
        if element in table:
            notes.append(f"{label}: {table[element]}")
    return f" (* {'; '.join(notes)} *)" if notes else ""


def export_grammar(grammar: Grammar, format: str = "ebnf") -> str:
    if format == "json":
        return json.dumps(grammar_to_dict(grammar), indent=2) + "\n"
    if format != "ebnf":
        raise ValueError(f"unknown grammar format {format!r}; expected ebnf or json")
    lines = [f"(* grammar {grammar.name}; start = {grammar.start} *)"]
    for p in grammar.productions:
        rhs = " ".join(p.rhs) if p.rhs else "ε"
        note = _ebnf_comment(grammar, p.lhs) if p.provenance.kind == "element" else ""
        lines.append(f"{p.lhs} ::= {rhs} ;{note}")
    lines.append("")
    lines.append("(* tokens *)")
    for t in grammar.tokens:
        if t.priority == LITERAL_PRIORITY and t.name.startswith('"'):
            continue
        lines.append(f"{t.name} = /{t.pattern}/ ;")
    for s in grammar.skip:
        lines.append(f"(* skip /{s}/ *)")
    for a, b in sorted(grammar.disambiguation.precedes):
        lines.append(f"(* precedes: {a} binds tighter than {b} *)")
    return "\n".join(lines) + "\n"
