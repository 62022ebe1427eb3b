"""Instance graphs: model-level objects built from a chosen parse tree."""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass, field

from ..asm import ElementKind, Model
from ..csm import Grammar
from ..diagnostics import NO_SPAN, Diagnostic, Span, error
from .disambiguate import Tree


@dataclass(frozen=True)
class NodeRef:
    id: int


@dataclass(frozen=True)
class RefValue:
    text: str


@dataclass
class Instance:
    id: int
    element: str
    slots: dict = field(default_factory=dict)
    start: int = 0          # token range covered
    end: int = 0
    location: Span = NO_SPAN


@dataclass(frozen=True)
class Edge:
    """A resolved reference: ``source.member`` points at ``target``."""
    source: int
    member: str
    target: int


@dataclass
class InstanceGraph:
    nodes: list[Instance] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    roots: list[int] = field(default_factory=list)

    @property
    def root(self) -> int | None:
        return self.roots[0] if self.roots else None

    def node(self, id: int) -> Instance:
        return self.nodes[id]

    def cross_edges(self) -> list[Edge]:
        return list(self.edges)

    def children(self, id: int, member: str) -> list:
        value = self.nodes[id].slots.get(member)
        if value is None:
            return []
        values = value if isinstance(value, list) else [value]
        return [self.nodes[v.id] if isinstance(v, NodeRef) else v for v in values]


def build_instances(tree: Tree, grammar: Grammar, model: Model, tokens=(), source: str = "") -> InstanceGraph:
    """Instances for ``tree``, numbered in pre-order; references stay unresolved.

    Pass the parsed ``tokens`` to get source locations.
    """
    graph = InstanceGraph()
    prods = grammar.productions

    def location(i: int, j: int) -> Span:
        if not tokens or i >= j:
            return NO_SPAN
        first, last = tokens[i], tokens[j - 1]
        end_line = last.line + last.text.count("\n")
        end_column = (len(last.text) - last.text.rfind("\n") if "\n" in last.text
                      else last.column + len(last.text))
        return Span(first.line, first.column, end_line, end_column, source)

    def new(element: str, t: Tree) -> Instance:
        inst = Instance(len(graph.nodes), element, {}, t.key[1], t.key[2], location(t.key[1], t.key[2]))
        graph.nodes.append(inst)
        return inst

    def token_node(t: Tree) -> NodeRef:
        inst = new(t.symbol, t)
        inst.slots[grammar.value_names.get(t.symbol, "value")] = t.text
        return NodeRef(inst.id)

    def element(t: Tree) -> NodeRef:
        prod = prods[t.prod]
        if prod.provenance.kind == "variant":
            child = next(c for c, r in zip(t.children, prod.roles) if r == "variant")
            return token_node(child) if child.prod is None else element(child)
        inst = new(prod.provenance.element, t)
        for m in model.element(inst.element).members:
            inst.slots[m.name] = [] if m.repeats else None
        fill(inst, t)
        return NodeRef(inst.id)

    def fill(inst: Instance, t: Tree) -> None:
        prod = prods[t.prod]
        for child, role in zip(t.children, prod.roles):
            if role is None:
                continue
            if child.prod is not None and prods[child.prod].provenance.kind in ("list", "opt"):
                fill(inst, child)
                continue
            member = prod.provenance.member if role == "item" else role
            mdef = model.element(inst.element).member(member)
            if child.prod is None:
                value = RefValue(child.text) if mdef.is_reference else child.text
            else:
                value = element(child)
            if mdef.repeats:
                inst.slots[member].append(value)
            else:
                inst.slots[member] = value

    graph.roots.append((token_node(tree) if tree.prod is None else element(tree)).id)
    return graph


def resolve_references(graph: InstanceGraph, model: Model) -> tuple[InstanceGraph, list[Diagnostic]]:
    """Add an edge per resolvable reference; report duplicate and unknown identifiers.

    Identifiers live in one global namespace keyed by (element, text); a
    reference may land on any concrete element its target type covers.
    """
    diags: list[Diagnostic] = []
    defined: dict[tuple[str, str], int] = {}
    for inst in graph.nodes:
        idm = model.id_member(inst.element)
        if idm is None or inst.slots.get(idm.name) is None:
            continue
        key = (inst.element, inst.slots[idm.name])
        if key in defined:
            first = graph.nodes[defined[key]]
            diags.append(error("duplicate-id", f"{inst.element} {key[1]!r} is already defined",
                               inst.location, related=first.location))
        else:
            defined[key] = inst.id

    for inst in graph.nodes:
        elem = model.element(inst.element)
        if elem is None or elem.kind is not ElementKind.COMPOSITE:
            continue
        for m in elem.members:
            if not m.is_reference:
                continue
            value = inst.slots.get(m.name)
            for ref in (value if isinstance(value, list) else [value]):
                if not isinstance(ref, RefValue):
                    continue
                targets = model.concrete_elements(m.target)
                hit = next((defined[(t, ref.text)] for t in targets if (t, ref.text) in defined), None)
                if hit is not None:
                    graph.edges.append(Edge(inst.id, m.name, hit))
                    continue
                known = sorted({text for (t, text) in defined if t in targets})
                close = difflib.get_close_matches(ref.text, known, n=3)
                hint = f"; did you mean {', '.join(repr(c) for c in close)}?" if close else ""
                diags.append(error("unknown-reference",
                                   f"{inst.element}.{m.name} refers to unknown {m.target} {ref.text!r}{hint}",
                                   inst.location))
    return graph, diags


def unparse(graph: InstanceGraph, grammar: Grammar, node: int | None = None) -> list[str]:
    """Token texts that reproduce the instance, delimiters included.

    Where a delimiter allows several literals the first one is used, so the
    result matches the original input whenever delimiters are single-valued.
    """
    by_lhs: dict[str, list] = {}
    for p in grammar.productions:
        by_lhs.setdefault(p.lhs, []).append(p)
    out: list[str] = []

    def literal(symbol: str) -> None:
        if symbol in by_lhs:           # several literal choices
            literal(by_lhs[symbol][0].rhs[0])
        else:
            out.append(json.loads(symbol))

    def value(v) -> None:
        if isinstance(v, NodeRef):
            instance(graph.node(v.id))
        elif isinstance(v, RefValue):
            out.append(v.text)
        else:
            out.append(v)

    def instance(inst: Instance) -> None:
        if inst.element not in by_lhs:   # token node
            out.append(next(iter(inst.slots.values())))
            return
        (prod,) = [p for p in by_lhs[inst.element] if p.provenance.kind == "element"]
        emit(prod, inst, None, 0)

    def emit(prod, inst: Instance, items, count: int) -> None:
        for sym, role in zip(prod.rhs, prod.roles):
            if role is None:
                literal(sym)
            elif role == "item":
                value(items.pop(0))
            elif role == "list":
                rest = count - prod.roles.count("item")
                emit(_list_production(by_lhs[sym], rest), inst, items, rest)
            else:
                member = inst.slots[role]
                if sym.endswith(".opt"):
                    if member is None or member == []:
                        continue
                    (core,) = [p for p in by_lhs[sym] if p.rhs]
                    emit(core, inst, None, 0)
                elif sym.endswith(".list"):
                    emit(_list_production(by_lhs[sym], len(member)), inst, list(member), len(member))
                else:
                    value(member)

    instance(graph.node(graph.root if node is None else node))
    return out


def _list_production(prods, count: int):
    """The list production that, applied outermost, covers ``count`` items."""
    for p in prods:
        if "list" not in p.roles and p.roles.count("item") == count:
            return p
    return next(p for p in prods if "list" in p.roles)


def _json_value(value):
    if isinstance(value, list):
        return [_json_value(v) for v in value]
    if isinstance(value, NodeRef):
        return {"node": value.id}
    if isinstance(value, RefValue):
        return {"ref": value.text}
    return value


def graph_to_dict(graph: InstanceGraph) -> dict:
    return {
        "roots": list(graph.roots),
        "nodes": [{"id": n.id, "element": n.element,
                   "members": {k: _json_value(v) for k, v in n.slots.items()}} for n in graph.nodes],
        "edges": [{"from": e.source, "member": e.member, "to": e.target} for e in graph.edges],
    }


def graph_to_json(graph: InstanceGraph) -> str:
    return json.dumps(graph_to_dict(graph), indent=2) + "\n"
