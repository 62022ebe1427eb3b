"""Parser for ASM-CSM mapping files.

A mapping file is a list of constraint definitions::

    Element.name[separator]: "."
    ConstraintDefinition: target ("[" constraintID "]")? (":" constraint)?
    ConstraintSpecification: SequenceSpecification < PrecedenceSpecification
                             < AlternationSpecification

A definition ends at the end of its line unless brackets are still open, the
line ends with an operator, or the next line is indented or starts with
``<`` or ``|``.  Operator binding, tightest first: postfix ``* ? +``,
juxtaposition, ``<`` chains, ``|`` chains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .diagnostics import NO_SPAN, Diagnostic, Span, error, warning
from .kinds import CONSTRAINT_KEYWORDS

# --- document model ----------------------------------------------------------


@dataclass(frozen=True)
class ElementPath:
    segments: tuple[str, ...]
    span: Span = field(default=NO_SPAN, compare=False)

    def __str__(self) -> str:
        return ".".join(self.segments)


@dataclass(frozen=True)
class SequenceSpec:
    items: tuple["Spec", ...]


@dataclass(frozen=True)
class AlternationSpec:
    branches: tuple["Spec", ...]


@dataclass(frozen=True)
class PrecedenceSpec:
    links: tuple["Spec", ...]


@dataclass(frozen=True)
class ClosureSpec:
    inner: "Spec"


@dataclass(frozen=True)
class OptionalSpec:
    inner: "Spec"


@dataclass(frozen=True)
class PositiveSpec:
    inner: "Spec"


@dataclass(frozen=True)
class ParenSpec:
    inner: "Spec"


@dataclass(frozen=True)
class PatternLiteral:
    """Quoted text; ``text`` has escapes resolved, ``raw`` is as written."""

    text: str
    raw: str | None = None

    def __post_init__(self):
        if self.raw is None:
            object.__setattr__(self, "raw", escape_literal(self.text))


@dataclass(frozen=True)
class ElementRef:
    path: ElementPath


@dataclass(frozen=True)
class BooleanValue:
    value: bool


@dataclass(frozen=True)
class IntegerValue:
    value: int


Spec = Union[
    SequenceSpec, AlternationSpec, PrecedenceSpec, ClosureSpec, OptionalSpec, PositiveSpec,
    ParenSpec, PatternLiteral, ElementRef, BooleanValue, IntegerValue,
]

POSTFIX_TYPES = (ClosureSpec, OptionalSpec, PositiveSpec)


@dataclass(frozen=True)
class ConstraintDefinition:
    target: ElementPath
    constraint_id: str | None = None
    constraint: Spec | None = None
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class MappingDocument:
    definitions: tuple[ConstraintDefinition, ...]
    source_name: str = field(default="", compare=False)


# --- tokens ------------------------------------------------------------------

IDENT, LITERAL, INT = "ident", "literal", "int"
PUNCT = {
    "[": "lbracket", "]": "rbracket", ":": "colon", ".": "dot", "*": "star", "?": "qmark",
    "+": "plus", "(": "lparen", ")": "rparen", "|": "pipe", "<": "lt",
}
ESCAPABLE = set('[]()*?+|<."\\')


@dataclass(frozen=True)
class DslToken:
    kind: str
    text: str
    line: int
    column: int
    offset: int
    end: int
    first_on_line: bool = False
    indented: bool = False
    raw: str = ""
    synthetic: bool = False

    def span(self, source: str = "") -> Span:
        return Span(self.line, self.column, self.line, self.column + (self.end - self.offset), source)


class DslLexError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


def unescape_literal(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body) and body[i + 1] in ESCAPABLE:
            out.append(body[i + 1])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def escape_literal(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def pattern_source(raw: str) -> str:
    """Pattern text of a quoted literal: only the quote escape belongs to the DSL."""
    return raw.replace('\\"', '"')


def tokenize_mapping(source: str) -> list[DslToken]:
    tokens: list[DslToken] = []
    i, line, line_start = 0, 1, 0
    at_line_start, indented = True, False
    n = len(source)
    while i < n:
        ch = source[i]
        col = i - line_start + 1
        if ch == "\n":
            i += 1
            line += 1
            line_start = i
            at_line_start, indented = True, False
            continue
        if ch in " \t\r\f":
            if at_line_start and i == line_start:
                indented = True
            i += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        first = at_line_start
        at_line_start = False
        if ch == '"':
            j = i + 1
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    break
                j += 2 if source[j] == "\\" and j + 1 < n and source[j + 1] != "\n" else 1
            if j >= n or source[j] != '"':
                raise DslLexError("unterminated quote", line, col)
            raw = source[i + 1:j]
            tokens.append(DslToken(LITERAL, unescape_literal(raw), line, col, i, j + 1, first, indented, raw))
            i = j + 1
        elif ch.isalpha():
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] == "_") and source[j].isascii():
                j += 1
            tokens.append(DslToken(IDENT, source[i:j], line, col, i, j, first, indented))
            i = j
        elif ch.isdigit():
            j = i + 1
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(DslToken(INT, source[i:j], line, col, i, j, first, indented))
            i = j
        elif ch in PUNCT:
            tokens.append(DslToken(PUNCT[ch], ch, line, col, i, i + 1, first, indented))
            i += 1
        else:
            raise DslLexError(f"illegal character {ch!r}", line, col)
    return tokens


_OPEN = {"lbracket", "lparen"}
_CLOSE = {"rbracket", "rparen"}
_TRAILING_OPERATORS = {"colon", "lt", "pipe", "dot", "lbracket", "lparen"}
_LEADING_OPERATORS = {"lt", "pipe", "rbracket", "rparen", "colon", "dot", "star", "qmark", "plus"}


def split_definitions(tokens: list[DslToken]) -> list[list[DslToken]]:
    """Group tokens into definitions by the line layout rules."""
    chunks: list[list[DslToken]] = []
    depth = 0
    for tok in tokens:
        starts_new = (
            not chunks
            or (
                tok.first_on_line
                and not tok.indented
                and depth <= 0
                and chunks[-1][-1].kind not in _TRAILING_OPERATORS
                and tok.kind not in _LEADING_OPERATORS
            )
        )
        if starts_new:
            chunks.append([])
            depth = 0
        chunks[-1].append(tok)
        if tok.kind in _OPEN:
            depth += 1
        elif tok.kind in _CLOSE:
            depth -= 1
    return chunks


def _header_end(chunk: list[DslToken]) -> int:
    """Index just past ``path ([ident])?`` at the start of a definition."""
    i = 0
    if i < len(chunk) and chunk[i].kind == IDENT:
        i += 1
        while i + 1 < len(chunk) and chunk[i].kind == "dot" and chunk[i + 1].kind == IDENT:
            i += 2
        if i + 2 < len(chunk) and chunk[i].kind == "lbracket" and chunk[i + 2].kind == "rbracket":
            i += 3
    return i


def lenient_repair(tokens: list[DslToken], strict: bool = False) -> tuple[list[DslToken], list[Diagnostic]]:
    """Insert the ``:`` a definition omits before its literal value."""
    if strict:
        return list(tokens), []
    out: list[DslToken] = []
    diags: list[Diagnostic] = []
    for chunk in split_definitions(tokens):
        cut = _header_end(chunk)
        if 0 < cut < len(chunk) and chunk[cut].kind == LITERAL:
            prev, lit = chunk[cut - 1], chunk[cut]
            colon = DslToken("colon", ":", prev.line, prev.column + (prev.end - prev.offset),
                             prev.end, prev.end, synthetic=True)
            out.extend(chunk[:cut])
            out.append(colon)
            out.extend(chunk[cut:])
            diags.append(warning("missing-colon", "missing ':' before constraint value inserted",
                                 lit.span()))
        else:
            out.extend(chunk)
    return out, diags


def repair_source(source: str, strict: bool = False) -> tuple[str, list[Diagnostic]]:
    """Text-level form of :func:`lenient_repair`, for parsers that lex on their own."""
    tokens, diags = lenient_repair(tokenize_mapping(source), strict)
    inserts = [t.offset for t in tokens if t.synthetic]
    if not inserts:
        return source, diags
    parts = []
    last = 0
    for offset in inserts:
        parts.append(source[last:offset])
        parts.append(":")
        last = offset
    parts.append(source[last:])
    return "".join(parts), diags


# --- parser ------------------------------------------------------------------

class _SyntaxProblem(Exception):
    def __init__(self, message: str, token: DslToken | None):
        super().__init__(message)
        self.token = token


class _DefinitionParser:
    def __init__(self, chunk: list[DslToken], source_name: str):
        self.toks = chunk
        self.i = 0
        self.source_name = source_name

    def peek(self) -> DslToken | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def at(self, kind: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind

    def take(self, kind: str) -> DslToken:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            found = "end of definition" if tok is None else repr(tok.text)
            raise _SyntaxProblem(f"expected {kind}, found {found}", tok or self.toks[-1])
        self.i += 1
        return tok

    def definition(self) -> ConstraintDefinition:
        first = self.toks[0]
        target = self.path()
        constraint_id = None
        if self.at("lbracket"):
            self.take("lbracket")
            constraint_id = self.take(IDENT).text
            self.take("rbracket")
        constraint = None
        if self.at("colon"):
            self.take("colon")
            constraint = self.alternation()
        if self.peek() is not None:
            tok = self.peek()
            if tok.kind == LITERAL and constraint is None:
                raise _SyntaxProblem("expected ':' before constraint value", tok)
            raise _SyntaxProblem(f"unexpected {tok.text!r}", tok)
        last = self.toks[-1]
        span = Span(first.line, first.column, last.line, last.column + (last.end - last.offset), self.source_name)
        return ConstraintDefinition(target, constraint_id, constraint, span)

    def path(self) -> ElementPath:
        first = self.take(IDENT)
        segments = [first.text]
        while self.at("dot"):
            self.take("dot")
            segments.append(self.take(IDENT).text)
        return ElementPath(tuple(segments), first.span(self.source_name))

    def alternation(self) -> Spec:
        branches = [self.precedence()]
        while self.at("pipe"):
            self.take("pipe")
            branches.append(self.precedence())
        return branches[0] if len(branches) == 1 else AlternationSpec(tuple(branches))

    def precedence(self) -> Spec:
        links = [self.sequence()]
        while self.at("lt"):
            self.take("lt")
            links.append(self.sequence())
        return links[0] if len(links) == 1 else PrecedenceSpec(tuple(links))

    def sequence(self) -> Spec:
        items = [self.postfix()]
        while self.peek() is not None and self.peek().kind in (LITERAL, INT, IDENT, "lparen"):
            items.append(self.postfix())
        return items[0] if len(items) == 1 else SequenceSpec(tuple(items))

    def postfix(self) -> Spec:
        spec = self.atom()
        while self.peek() is not None and self.peek().kind in ("star", "qmark", "plus"):
            kind = self.take(self.peek().kind).kind
            spec = {"star": ClosureSpec, "qmark": OptionalSpec, "plus": PositiveSpec}[kind](spec)
        return spec

    def atom(self) -> Spec:
        tok = self.peek()
        if tok is None:
            raise _SyntaxProblem("expected a constraint, found end of definition", self.toks[-1])
        if tok.kind == LITERAL:
            self.i += 1
            return PatternLiteral(tok.text, tok.raw)
        if tok.kind == INT:
            self.i += 1
            return IntegerValue(int(tok.text))
        if tok.kind == IDENT:
            if tok.text in ("true", "false") and not (
                self.i + 1 < len(self.toks) and self.toks[self.i + 1].kind == "dot"
            ):
                self.i += 1
                return BooleanValue(tok.text == "true")
            return ElementRef(self.path())
        if tok.kind == "lparen":
            self.take("lparen")
            inner = self.alternation()
            self.take("rparen")
            return ParenSpec(inner)
        raise _SyntaxProblem(f"unexpected {tok.text!r}", tok)


def check_definition(definition: ConstraintDefinition, location: Span = NO_SPAN) -> list[Diagnostic]:
    """Structural checks shared by every route that builds definitions."""
    diags = []
    if definition.constraint_id is not None and definition.constraint_id not in CONSTRAINT_KEYWORDS:
        diags.append(error("unknown-constraint-id",
                           f"unknown constraint id [{definition.constraint_id}]; expected one of "
                           + ", ".join(CONSTRAINT_KEYWORDS), location))
    if definition.constraint_id is None and definition.constraint is None:
        diags.append(error("empty-definition",
                           f"definition of {definition.target} has neither a constraint id nor a constraint",
                           location))
    return diags


def parse_mapping(source: str, source_name: str = "", strict: bool = False) -> tuple[MappingDocument, list[Diagnostic]]:
    diags: list[Diagnostic] = []
    try:
        tokens = tokenize_mapping(source)
    except DslLexError as exc:
        kind = "dsl-unterminated-literal" if "quote" in exc.message else "dsl-illegal-character"
        return MappingDocument((), source_name), [
            error(kind, exc.message, Span(exc.line, exc.column, exc.line, exc.column, source_name))
        ]
    tokens, repair_diags = lenient_repair(tokens, strict)
    diags.extend(
        warning(d.code, d.message, Span(d.location.line, d.location.column, d.location.end_line,
                                        d.location.end_column, source_name))
        for d in repair_diags
    )
    definitions = []
    for chunk in split_definitions(tokens):
        parser = _DefinitionParser(chunk, source_name)
        try:
            definition = parser.definition()
        except _SyntaxProblem as exc:
            tok = exc.token
            diags.append(error("dsl-syntax", str(exc), tok.span(source_name) if tok else NO_SPAN))
            continue
        problems = check_definition(definition, definition.span)
        diags.extend(problems)
        if any(p.is_error for p in problems):
            continue
        definitions.append(definition)
    return MappingDocument(tuple(definitions), source_name), diags


# --- printing ----------------------------------------------------------------

def render_spec(spec: Spec) -> str:
    if isinstance(spec, SequenceSpec):
        return " ".join(render_spec(s) for s in spec.items)
    if isinstance(spec, AlternationSpec):
        return " | ".join(render_spec(s) for s in spec.branches)
    if isinstance(spec, PrecedenceSpec):
        return " < ".join(render_spec(s) for s in spec.links)
    if isinstance(spec, ClosureSpec):
        return render_spec(spec.inner) + "*"
    if isinstance(spec, OptionalSpec):
        return render_spec(spec.inner) + "?"
    if isinstance(spec, PositiveSpec):
        return render_spec(spec.inner) + "+"
    if isinstance(spec, ParenSpec):
        return "(" + render_spec(spec.inner) + ")"
    if isinstance(spec, PatternLiteral):
        return '"' + spec.raw + '"'
    if isinstance(spec, ElementRef):
        return str(spec.path)
    if isinstance(spec, BooleanValue):
        return "true" if spec.value else "false"
    if isinstance(spec, IntegerValue):
        return str(spec.value)
    raise TypeError(f"not a constraint specification: {spec!r}")


def render_definition(definition: ConstraintDefinition) -> str:
    text = str(definition.target)
    if definition.constraint_id is not None:
        text += f"[{definition.constraint_id}]"
    if definition.constraint is not None:
        text += ": " + render_spec(definition.constraint)
    return text


def render_mapping(document: MappingDocument) -> str:
    return "".join(render_definition(d) + "\n" for d in document.definitions)
