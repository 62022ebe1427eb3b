"""Abstract syntax models: language elements, members and inline annotations.

Model files look like this::

    language Arithmetic
    skip "[ \\t\\r\\n]+"

    element Expr = Add | Lit
    element Add @Associativity(left) {
        left: Expr
        right: Expr @Prefix("+")
    }
    token Lit @Pattern("[0-9]+")

Member multiplicity suffixes: ``?`` ``*`` ``+`` and ``{m,n}`` / ``{m,*}``;
``id`` and ``ref`` in front of a member name mark identifiers and references.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cached_property

from .diagnostics import NO_SPAN, Diagnostic, Span, error
from .kinds import UNBOUNDED, ConstraintKind, check_value
from .patterns import PatternError, check_pattern

IDENTIFIER = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*")


class ElementKind(enum.Enum):
    COMPOSITE = "composite"
    ALTERNATIVE = "alternative"
    TOKEN = "token"


@dataclass(frozen=True)
class AnnotationConstraint:
    kind: ConstraintKind
    value: object
    member: str | None = None
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class MemberDef:
    name: str
    target: str
    min: int = 1
    max: int | str = 1
    is_id: bool = False
    is_reference: bool = False
    span: Span = field(default=NO_SPAN, compare=False)

    @property
    def repeats(self) -> bool:
        return self.max == UNBOUNDED or self.max > 1

    @property
    def optional(self) -> bool:
        return self.min == 0


@dataclass(frozen=True)
class ElementDef:
    name: str
    kind: ElementKind
    members: tuple[MemberDef, ...] = ()
    variants: tuple[str, ...] = ()
    default_constraints: tuple[AnnotationConstraint, ...] = ()
    span: Span = field(default=NO_SPAN, compare=False)

    def member(self, name: str) -> MemberDef | None:
        for m in self.members:
            if m.name == name:
                return m
        return None

    @property
    def value_name(self) -> str:
        """Slot that stores the matched text of a token element."""
        for c in self.default_constraints:
            if c.kind is ConstraintKind.VALUE and c.member is None:
                return c.value
        return "value"

    def annotation(self, kind: ConstraintKind, member: str | None = None):
        for c in self.default_constraints:
            if c.kind is kind and c.member == member:
                return c.value
        return None


@dataclass(frozen=True)
class Model:
    name: str
    elements: tuple[ElementDef, ...] = ()
    skip_patterns: tuple[str, ...] = ()

    @cached_property
    def _index(self) -> dict[str, ElementDef]:
        index: dict[str, ElementDef] = {}
        for e in self.elements:
            index.setdefault(e.name, e)
        return index

    def element(self, name: str) -> ElementDef | None:
        return self._index.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def concrete_elements(self, name: str) -> list[str]:
        """Non-alternative elements an alternative can stand for (itself otherwise)."""
        out: list[str] = []
        seen: set[str] = set()
        stack = [name]
        while stack:
            current = stack.pop()
            if current in seen:
                continue
            seen.add(current)
            elem = self.element(current)
            if elem is None:
                continue
            if elem.kind is ElementKind.ALTERNATIVE:
                stack.extend(reversed(elem.variants))
            else:
                out.append(current)
        return out

    def id_member(self, name: str) -> MemberDef | None:
        elem = self.element(name)
        if elem is None:
            return None
        for m in elem.members:
            if m.is_id:
                return m
        return None

    def self_nesting(self, name: str) -> bool:
        """True if some member of ``name`` can hold another ``name`` instance."""
        elem = self.element(name)
        if elem is None or elem.kind is not ElementKind.COMPOSITE:
            return False
        return any(name in self.concrete_elements(m.target) for m in elem.members if not m.is_reference)


class ModelSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int, source: str = ""):
        super().__init__(f"{source or '<model>'}:{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column
        self.span = Span(line, column, line, column, source)


# --- parsing -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[a-zA-Z][a-zA-Z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<punct>[{}()=|:,@?*+])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _unquote_model_string(raw: str) -> str:
    body = raw[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body) and body[i + 1] in '"\\':
            out.append(body[i + 1])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _quote_model_string(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _lex_model(source: str, source_name: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            if source[pos] == '"':
                raise ModelSyntaxError("unterminated string", line, col, source_name)
            raise ModelSyntaxError(f"unexpected character {source[pos]!r}", line, col, source_name)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _ModelParser:
    def __init__(self, source: str, source_name: str):
        self.source_name = source_name
        self.toks = _lex_model(source, source_name)
        self.i = 0

    def peek(self, offset: int = 0) -> _Tok:
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, message: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ModelSyntaxError(message, tok.line, tok.col, self.source_name)

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            got = tok.text or "end of file"
            self.fail(f"expected {want}, found {got!r}")
        return self.next()

    def span(self, tok: _Tok) -> Span:
        return Span(tok.line, tok.col, tok.line, tok.col + len(tok.text), self.source_name)

    def parse(self) -> Model:
        name = ""
        elements: list[ElementDef] = []
        skips: list[str] = []
        seen: dict[str, _Tok] = {}
        while self.peek().kind != "eof":
            tok = self.expect("ident")
            if tok.text == "language":
                if name:
                    self.fail("language declared twice", tok)
                name = self.expect("ident").text
            elif tok.text == "skip":
                skips.append(_unquote_model_string(self.expect("string").text))
            elif tok.text in ("token", "element"):
                name_tok = self.expect("ident")
                if name_tok.text in seen:
                    self.fail(f"duplicate element {name_tok.text}", name_tok)
                seen[name_tok.text] = name_tok
                if tok.text == "token":
                    elements.append(self.token_body(name_tok))
                else:
                    elements.append(self.element_body(name_tok))
            else:
                self.fail(f"expected language, skip, token or element, found {tok.text!r}", tok)
        if not name:
            self.fail("missing 'language <name>' declaration", self.toks[0])
        return Model(name, tuple(elements), tuple(skips))

    def token_body(self, name_tok: _Tok) -> ElementDef:
        annotations = self.annotations(None)
        return ElementDef(name_tok.text, ElementKind.TOKEN, default_constraints=tuple(annotations),
                          span=self.span(name_tok))

    def element_body(self, name_tok: _Tok) -> ElementDef:
        annotations = self.annotations(None)
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "=":
            self.next()
            variants = [self.expect("ident").text]
            while self.peek().text == "|" and self.peek().kind == "punct":
                self.next()
                variants.append(self.expect("ident").text)
            return ElementDef(name_tok.text, ElementKind.ALTERNATIVE, variants=tuple(variants),
                              default_constraints=tuple(annotations), span=self.span(name_tok))
        self.expect("punct", "{")
        members: list[MemberDef] = []
        while not (self.peek().kind == "punct" and self.peek().text == "}"):
            if self.peek().kind == "eof":
                self.fail("unterminated element body")
            member, member_annotations = self.member()
            if any(m.name == member.name for m in members):
                self.fail(f"duplicate member {member.name} in {name_tok.text}")
            members.append(member)
            annotations.extend(member_annotations)
        self.next()
        return ElementDef(name_tok.text, ElementKind.COMPOSITE, members=tuple(members),
                          default_constraints=tuple(annotations), span=self.span(name_tok))

    def member(self) -> tuple[MemberDef, list[AnnotationConstraint]]:
        is_id = is_ref = False
        tok = self.expect("ident")
        while tok.text in ("id", "ref") and self.peek().kind == "ident":
            if tok.text == "id":
                is_id = True
            else:
                is_ref = True
            tok = self.expect("ident")
        name_tok = tok
        self.expect("punct", ":")
        target = self.expect("ident").text
        low, high = self.multiplicity()
        annotations = self.annotations(name_tok.text)
        kept = []
        for ann in annotations:
            if ann.kind is ConstraintKind.OPTIONAL:
                low = 0 if ann.value else max(low, 1)
            elif ann.kind is ConstraintKind.MINIMUM:
                low = ann.value
            elif ann.kind is ConstraintKind.MAXIMUM:
                high = ann.value
            elif ann.kind is ConstraintKind.ID:
                is_id = ann.value
            elif ann.kind is ConstraintKind.REFERENCE:
                is_ref = ann.value
            else:
                kept.append(ann)
        member = MemberDef(name_tok.text, target, low, high, is_id, is_ref, self.span(name_tok))
        return member, kept

    def multiplicity(self) -> tuple[int, int | str]:
        tok = self.peek()
        if tok.kind != "punct":
            return 1, 1
        if tok.text == "?":
            self.next()
            return 0, 1
        if tok.text == "*":
            self.next()
            return 0, UNBOUNDED
        if tok.text == "+":
            self.next()
            return 1, UNBOUNDED
        if tok.text == "{":
            self.next()
            low = int(self.expect("int").text)
            high: int | str = low
            if self.peek().text == ",":
                self.next()
                if self.peek().text == "*":
                    self.next()
                    high = UNBOUNDED
                else:
                    high = int(self.expect("int").text)
            self.expect("punct", "}")
            return low, high
        return 1, 1

    def annotations(self, member: str | None) -> list[AnnotationConstraint]:
        out: list[AnnotationConstraint] = []
        while self.peek().kind == "punct" and self.peek().text == "@":
            at = self.next()
            name_tok = self.expect("ident")
            kind = ConstraintKind.from_annotation(name_tok.text)
            if kind is None:
                self.fail(f"unknown annotation @{name_tok.text}", name_tok)
            args: list = []
            if self.peek().kind == "punct" and self.peek().text == "(":
                self.next()
                while True:
                    args.append(self.argument())
                    if self.peek().text == ",":
                        self.next()
                        continue
                    break
                self.expect("punct", ")")
            value = self.annotation_value(kind, args, name_tok)
            out.append(AnnotationConstraint(kind, value, member, self.span(at)))
        return out

    def argument(self):
        tok = self.next()
        if tok.kind == "string":
            return _unquote_model_string(tok.text)
        if tok.kind == "int":
            return int(tok.text)
        if tok.kind == "ident":
            if tok.text in ("true", "false"):
                return tok.text == "true"
            return ("ident", tok.text)
        if tok.kind == "punct" and tok.text == "*":
            return UNBOUNDED
        self.fail(f"unexpected annotation argument {tok.text!r}", tok)

    def annotation_value(self, kind: ConstraintKind, args: list, tok: _Tok):
        def bare(a):
            return a[1] if isinstance(a, tuple) else a

        if kind in (ConstraintKind.PREFIX, ConstraintKind.SUFFIX, ConstraintKind.SEPARATOR):
            value = tuple(args)
        elif kind in (ConstraintKind.OPTIONAL, ConstraintKind.ID, ConstraintKind.REFERENCE) and not args:
            value = True
        elif len(args) != 1:
            self.fail(f"@{kind.value} takes exactly one argument", tok)
        else:
            value = bare(args[0])
        problem = check_value(kind, value)
        if problem:
            self.fail(problem, tok)
        return value


def parse_model(source: str, source_name: str = "") -> Model:
    """Parse model-file text; raises :class:`ModelSyntaxError`."""
    return _ModelParser(source, source_name).parse()


# --- rendering ---------------------------------------------------------------

def _render_arg(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if value == UNBOUNDED:
        return "*"
    return str(value)


def _render_annotation(ann: AnnotationConstraint) -> str:
    kind, value = ann.kind, ann.value
    if kind in (ConstraintKind.PREFIX, ConstraintKind.SUFFIX, ConstraintKind.SEPARATOR):
        args = ", ".join(_quote_model_string(v) for v in value)
    elif kind is ConstraintKind.PATTERN:
        args = _quote_model_string(value)
    else:
        args = _render_arg(value)
    return f"@{kind.value}({args})"


def _render_multiplicity(m: MemberDef) -> str:
    table = {(1, 1): "", (0, 1): "?", (0, UNBOUNDED): "*", (1, UNBOUNDED): "+"}
    if (m.min, m.max) in table:
        return table[(m.min, m.max)]
    high = "*" if m.max == UNBOUNDED else str(m.max)
    return f"{{{m.min},{high}}}"


def render_model(model: Model) -> str:
    lines = [f"language {model.name}"]
    for skip in model.skip_patterns:
        lines.append(f"skip {_quote_model_string(skip)}")
    for elem in model.elements:
        lines.append("")
        head_anns = [a for a in elem.default_constraints if a.member is None]
        head = " ".join([elem.name] + [_render_annotation(a) for a in head_anns])
        if elem.kind is ElementKind.TOKEN:
            lines.append(f"token {head}")
        elif elem.kind is ElementKind.ALTERNATIVE:
            lines.append(f"element {head} = {' | '.join(elem.variants)}")
        else:
            lines.append(f"element {head} {{")
            for m in elem.members:
                mods = ("id " if m.is_id else "") + ("ref " if m.is_reference else "")
                anns = [_render_annotation(a) for a in elem.default_constraints if a.member == m.name]
                text = f"    {mods}{m.name}: {m.target}{_render_multiplicity(m)}"
                lines.append(" ".join([text] + anns))
            lines.append("}")
    return "\n".join(lines) + "\n"


# --- validation --------------------------------------------------------------

def validate_model(model: Model) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    seen: set[str] = set()
    for elem in model.elements:
        if elem.name in seen:
            diags.append(error("duplicate-element", f"duplicate element {elem.name}", elem.span))
        seen.add(elem.name)
    for pattern in model.skip_patterns:
        try:
            check_pattern(pattern)
        except PatternError as exc:
            diags.append(error("bad-pattern", f"skip pattern {pattern!r}: {exc}"))
    for elem in model.elements:
        diags.extend(_validate_element(model, elem))
    diags.extend(_alternative_cycles(model))
    return diags


def _validate_element(model: Model, elem: ElementDef) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    where = elem.span
    if elem.kind is ElementKind.TOKEN and (elem.members or elem.variants):
        diags.append(error("token-structure", f"token {elem.name} cannot have members or variants", where))
    if elem.kind is ElementKind.COMPOSITE and elem.variants:
        diags.append(error("token-structure", f"composite {elem.name} cannot have variants", where))
    if elem.kind is ElementKind.ALTERNATIVE:
        if elem.members:
            diags.append(error("alternative-structure", f"alternative {elem.name} cannot have members", where))
        if not elem.variants:
            diags.append(error("empty-alternative", f"alternative {elem.name} has no variants", where))
        for v in elem.variants:
            if v not in model:
                diags.append(error("unknown-element", f"unknown element {v}", where))
    names: set[str] = set()
    for m in elem.members:
        if m.name in names:
            diags.append(error("duplicate-member", f"duplicate member {elem.name}.{m.name}", m.span))
        names.add(m.name)
        target = model.element(m.target)
        if target is None:
            diags.append(error("unknown-element", f"unknown element {m.target}", m.span))
        if m.max != UNBOUNDED and (m.max < 1 or m.min > m.max):
            diags.append(error("bad-multiplicity", f"{elem.name}.{m.name}: invalid multiplicity", m.span))
        if m.is_id and m.is_reference:
            diags.append(error("id-and-ref", f"{elem.name}.{m.name} cannot be both id and ref", m.span))
        if m.is_id and target is not None and target.kind is not ElementKind.TOKEN:
            diags.append(error("id-not-token", f"id member {elem.name}.{m.name} must target a token", m.span))
        if m.is_reference and target is not None:
            concrete = model.concrete_elements(m.target)
            if not concrete or any(model.id_member(c) is None for c in concrete):
                diags.append(error("ref-without-id",
                                   f"reference {elem.name}.{m.name} targets {m.target}, which has no id member",
                                   m.span))
    for ann in elem.default_constraints:
        problem = check_value(ann.kind, ann.value)
        if problem:
            diags.append(error("bad-annotation", f"{elem.name}: {problem}", ann.span))
        if ann.member is not None and elem.member(ann.member) is None:
            diags.append(error("unknown-member", f"annotation on unknown member {elem.name}.{ann.member}", ann.span))
        if ann.kind is ConstraintKind.PATTERN:
            try:
                check_pattern(ann.value)
            except PatternError as exc:
                diags.append(error("bad-pattern", f"{elem.name}: {exc}", ann.span))
    return diags


def _alternative_cycles(model: Model) -> list[Diagnostic]:
    diags = []
    for elem in model.elements:
        if elem.kind is not ElementKind.ALTERNATIVE:
            continue
        stack = list(elem.variants)
        seen: set[str] = set()
        while stack:
            name = stack.pop()
            if name == elem.name:
                diags.append(error("alternative-cycle", f"alternative {elem.name} contains itself", elem.span))
                break
            if name in seen:
                continue
            seen.add(name)
            sub = model.element(name)
            if sub is not None and sub.kind is ElementKind.ALTERNATIVE:
                stack.extend(sub.variants)
    return diags


# --- paths -------------------------------------------------------------------

class PathError(ValueError):
    pass


@dataclass(frozen=True)
class PathTarget:
    kind: str  # "element", "member" or "missing"
    element: str | None = None
    member: str | None = None
    value_slot: bool = False
    prefix: "PathTarget | None" = None

    @property
    def missing(self) -> bool:
        return self.kind == "missing"


def resolve_path(model: Model, path) -> PathTarget:
    """Resolve ``Element`` or ``Element.member`` against ``model``."""
    segments = tuple(getattr(path, "segments", path))
    if not segments:
        raise PathError("empty path")
    if len(segments) > 2:
        raise PathError("nested paths unsupported")
    elem = model.element(segments[0])
    if elem is None:
        return PathTarget("missing", prefix=None)
    if len(segments) == 1:
        return PathTarget("element", elem.name)
    name = segments[1]
    if elem.kind is ElementKind.TOKEN and name == elem.value_name:
        return PathTarget("member", elem.name, name, value_slot=True)
    if elem.member(name) is not None:
        return PathTarget("member", elem.name, name)
    return PathTarget("missing", prefix=PathTarget("element", elem.name))
